use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("empty body")]
    EmptyBody,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("degenerate argument (zero direction or negative radius)")]
    Degenerate,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FenchelError {
    #[error("function is +inf at every node")]
    ImproperFunction,
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("grids are incompatible: {0}")]
    GridMismatch(String),
    #[error("second summand is finite up to the grid edge; its domain may be unbounded")]
    UnboundedSummand,
    #[error("cap {cap} does not exceed the minimum {min}")]
    CapTooLow { cap: f64, min: f64 },
    #[error("bound {lambda} lies below the minimum {min}")]
    EmptyResult { lambda: f64, min: f64 },
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZooError {
    #[error("unknown hamiltonian `{0}`")]
    UnknownName(String),
    #[error("expression: {0}")]
    Expr(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("empty Lagrangian slice at t={t}, x={x}")]
    GridUnderflow { t: f64, x: f64 },
    #[error("`{0}` has no growth bound c(t); the compact construction needs one")]
    MissingC(String),
    #[error("sampled L exceeds lambda by {excess} at t={t}, x={x}")]
    BlcViolation { t: f64, x: f64, excess: f64 },
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Fenchel(#[from] FenchelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompactnessError {
    #[error("control set is not compact")]
    NoncompactControl,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("index {index}: {reason}")]
    HypothesisViolation { index: u32, reason: String },
    #[error(transparent)]
    Build(#[from] BuildError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<ZooError> for CliError {
    fn from(e: ZooError) -> Self {
        CliError::Config(e.to_string())
    }
}
