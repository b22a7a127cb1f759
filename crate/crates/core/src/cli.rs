//! Batch runs from a JSON config. Each run writes
//! `<command>_<hamiltonian>_<seed>.{csv,json}` plus a `.meta.json` sidecar
//! holding everything that is allowed to differ between reruns.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::builder::{
    build_compact, build_noncompact, image_of_controls, sandwich_check, verify_triple, APlan,
    RepresentationTriple, Window,
};
use crate::compactness::{detect_blc_failure, pipeline_checks, BLC_MARGINS};
use crate::convex_geom::Vec2;
use crate::error::CliError;
use crate::expr::{Expr, PieceSource};
use crate::fenchel::{check_sum_rule, conjugate_windowed, UniformGrid};
use crate::report::{linspace, CheckReport, SamplePlan, WorstTracker};
use crate::stability::{
    fixed_t_convergence, representation_convergence, BuilderKind, PerturbationFamily, DECAY_RATIO,
};
use crate::zoo::{
    self, builtin, check_conjugate_oracle, check_epigraph_hausdorff, check_equivalence, Fn2,
    GridPolicy, HamiltonianSpec, LagrangianSource, ModulusSource,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Conjugate,
    Check,
    Represent,
    Verify,
    Compactness,
    Stability,
    /// projection map and Steiner point checks on random polygons
    Geometry,
    ZooList,
}

impl Command {
    fn as_str(self) -> &'static str {
        match self {
            Command::Conjugate => "conjugate",
            Command::Check => "check",
            Command::Represent => "represent",
            Command::Verify => "verify",
            Command::Compactness => "compactness",
            Command::Stability => "stability",
            Command::Geometry => "geometry",
            Command::ZooList => "zoo-list",
        }
    }
}

/// A Hamiltonian given by piecewise expressions in `t, x, p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalDef {
    pub name: String,
    pub pieces: Vec<PieceSource>,
    pub modulus: ModulusSource,
    #[serde(default = "unit_interval")]
    pub t_range: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianRef {
    Name(String),
    Names(Vec<String>),
    File { path: PathBuf },
    External(ExternalDef),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    #[serde(default = "unit_interval")]
    pub t_range: (f64, f64),
    #[serde(default = "sym_one")]
    pub x_range: (f64, f64),
    #[serde(default = "sym_three")]
    pub p_range: (f64, f64),
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            t_range: unit_interval(),
            x_range: sym_one(),
            p_range: sym_three(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// nodes of the p-window
    #[serde(default = "default_p_count")]
    pub p_count: usize,
    #[serde(default = "default_p_window")]
    pub p_window: f64,
    #[serde(default = "default_v_step")]
    pub v_step: f64,
    /// nodes of the output v-grid of `conjugate`; the step is used otherwise
    #[serde(default)]
    pub v_count: Option<usize>,
    #[serde(default)]
    pub a_plan: Option<APlan>,
    #[serde(default = "default_source")]
    pub source: LagrangianSource,
    #[serde(default = "default_dirs")]
    pub steiner_dirs: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            p_count: default_p_count(),
            p_window: default_p_window(),
            v_step: default_v_step(),
            v_count: None,
            a_plan: None,
            source: default_source(),
            steiner_dirs: default_dirs(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct At {
    pub t: f64,
    pub x: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    /// halve `k_R`; where `k_R` vanishes on the sampled window, halve `w_R`
    HalveK,
    HalveW,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    /// label used in artifact names; defaults to the expression
    #[serde(default)]
    pub name: Option<String>,
    /// restrict to one of the run's hamiltonians
    #[serde(default)]
    pub hamiltonian: Option<String>,
    #[serde(default)]
    pub builder: Option<BuilderKind>,
    /// expression in `i, t, x, p`
    pub expr: String,
    /// members must match the limit exactly instead of decaying
    #[serde(default)]
    pub zero_control: bool,
    #[serde(default = "default_indices")]
    pub indices: Vec<u32>,
    /// `lambda_i` in `i, t, x` for compact builds; `i = 0` is the limit
    #[serde(default)]
    pub lambda: Option<String>,
    #[serde(default)]
    pub fixed_t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Builders {
    One(BuilderKind),
    Many(Vec<BuilderKind>),
}

impl Builders {
    pub fn kinds(&self) -> Vec<BuilderKind> {
        match self {
            Builders::One(k) => vec![*k],
            Builders::Many(ks) => ks.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Perturbations {
    One(PerturbationConfig),
    Many(Vec<PerturbationConfig>),
}

impl Perturbations {
    pub fn list(&self) -> &[PerturbationConfig] {
        match self {
            Perturbations::One(p) => std::slice::from_ref(p),
            Perturbations::Many(ps) => ps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Xs {
    Shared(Vec<f64>),
    PerHamiltonian(BTreeMap<String, Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianRef>,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub at: Option<At>,
    /// states swept at `at.t`, shared or per hamiltonian
    #[serde(default)]
    pub xs: Option<Xs>,
    #[serde(default)]
    pub ps: Option<Vec<f64>>,
    #[serde(default)]
    pub builder: Option<Builders>,
    /// `lambda(t, x)` for compact builds
    #[serde(default)]
    pub lambda: Option<String>,
    #[serde(default = "default_r_ball")]
    pub r_ball: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub mutation: Option<Mutation>,
    #[serde(default)]
    pub perturbation: Option<Perturbations>,
    /// also run the stock-triple chain in `compactness`
    #[serde(default)]
    pub pipeline: bool,
    /// random polygon pairs for `geometry`
    #[serde(default = "default_pairs")]
    pub pairs: usize,
}

fn unit_interval() -> (f64, f64) {
    (0.0, 1.0)
}
fn sym_one() -> (f64, f64) {
    (-1.0, 1.0)
}
fn sym_three() -> (f64, f64) {
    (-3.0, 3.0)
}
fn default_p_count() -> usize {
    crate::fenchel::P_COUNT
}
fn default_p_window() -> f64 {
    crate::fenchel::P_WINDOW
}
fn default_v_step() -> f64 {
    0.01
}
fn default_source() -> LagrangianSource {
    LagrangianSource::Numeric
}
fn default_dirs() -> usize {
    crate::convex_geom::DEFAULT_STEINER_DIRS
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_r_ball() -> f64 {
    2.0
}
fn default_samples() -> usize {
    64
}
fn default_pairs() -> usize {
    200
}
fn default_indices() -> Vec<u32> {
    crate::stability::DEFAULT_INDICES.to_vec()
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.grids;
        if g.p_count < 33 || g.v_count.is_some_and(|c| c < 33) {
            return Err(cfg_err("grid counts must be at least 33"));
        }
        if !(g.v_step > 0.0 && g.p_window > 0.0) {
            return Err(cfg_err("v_step and p_window must be positive"));
        }
        let w = &self.window;
        for (name, (lo, hi)) in [
            ("t_range", w.t_range),
            ("x_range", w.x_range),
            ("p_range", w.p_range),
        ] {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(cfg_err(format!("window.{name} is empty")));
            }
        }
        if self.samples == 0 {
            return Err(cfg_err("samples must be positive"));
        }
        if !matches!(self.command, Command::ZooList | Command::Geometry)
            && self.hamiltonian.is_none()
        {
            return Err(cfg_err("missing `hamiltonian`"));
        }
        if self.command == Command::Stability && self.perturbation.is_none() {
            return Err(cfg_err("`stability` needs a `perturbation`"));
        }
        Ok(())
    }

    pub fn policy(&self) -> Result<GridPolicy, CliError> {
        let g = &self.grids;
        Ok(GridPolicy {
            p_grid: UniformGrid::new(-g.p_window, g.p_window, g.p_count)
                .map_err(|e| cfg_err(e.to_string()))?,
            v_step: g.v_step,
            v_half_width: 3.0,
            steiner_dirs: g.steiner_dirs,
            source: g.source,
        })
    }

    fn plan(&self) -> SamplePlan {
        SamplePlan {
            seed: self.seed,
            triples: self.samples,
            ..Default::default()
        }
    }

    fn window(&self) -> Window {
        Window {
            t_range: self.window.t_range,
            x_range: self.window.x_range,
            p_range: self.window.p_range,
        }
    }

    fn at(&self) -> At {
        self.at.unwrap_or(At { t: 0.5, x: 0.5 })
    }

    fn xs_for(&self, name: &str) -> Option<Vec<f64>> {
        match &self.xs {
            Some(Xs::Shared(v)) => Some(v.clone()),
            Some(Xs::PerHamiltonian(m)) => m.get(name).cloned(),
            None => None,
        }
    }

    fn xs(&self, name: &str) -> Vec<f64> {
        self.xs_for(name).unwrap_or_else(|| vec![self.at().x])
    }

    fn builders(&self) -> Vec<BuilderKind> {
        self.builder
            .as_ref()
            .map_or_else(|| vec![BuilderKind::Noncompact], Builders::kinds)
    }

    fn ps(&self) -> Vec<f64> {
        self.ps
            .clone()
            .unwrap_or_else(|| vec![-3.0, -1.0, 0.0, 1.0, 3.0])
    }

    fn hamiltonians(&self, base_dir: &Path) -> Result<Vec<HamiltonianSpec>, CliError> {
        let external = |d: &ExternalDef| {
            zoo::external(&d.name, &d.pieces, &d.modulus, d.t_range).map_err(CliError::from)
        };
        match self
            .hamiltonian
            .as_ref()
            .ok_or_else(|| cfg_err("missing `hamiltonian`"))?
        {
            HamiltonianRef::Name(n) => Ok(vec![builtin(n)?]),
            HamiltonianRef::Names(ns) => ns
                .iter()
                .map(|n| builtin(n).map_err(CliError::from))
                .collect(),
            HamiltonianRef::External(d) => Ok(vec![external(d)?]),
            HamiltonianRef::File { path } => {
                let path = if path.is_absolute() {
                    path.clone()
                } else {
                    base_dir.join(path)
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                let d: ExternalDef =
                    serde_json::from_str(&text).map_err(|e| cfg_err(e.to_string()))?;
                Ok(vec![external(&d)?])
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub quiet: bool,
    /// directory that relative `path` references resolve against
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub exit_code: u8,
    pub lines: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

struct Sink<'a> {
    cfg: &'a RunConfig,
    quiet: bool,
    lines: Vec<String>,
    artifacts: Vec<PathBuf>,
    failed: bool,
}

impl Sink<'_> {
    fn stem(&self, name: &str) -> String {
        format!("{}_{}_{}", self.cfg.command.as_str(), name, self.cfg.seed)
    }

    fn write(&mut self, name: &str, ext: &str, body: &str) -> Result<(), CliError> {
        let dir = &self.cfg.output_dir;
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join(format!("{}.{ext}", self.stem(name)));
        std::fs::write(&path, body)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.artifacts.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut body =
            serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        body.push('\n');
        self.write(name, "json", &body)
    }

    fn meta(&mut self, name: &str) -> Result<(), CliError> {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let meta = serde_json::json!({
            "timestamp_unix": secs,
            "version": env!("CARGO_PKG_VERSION"),
        });
        self.write(name, "meta.json", &format!("{meta}\n"))
    }

    fn line(&mut self, s: String) {
        if !self.quiet {
            println!("{s}");
        }
        self.lines.push(s);
    }

    /// Apply overrides, print one line, remember failures.
    fn judge(&mut self, name: &str, r: CheckReport) -> CheckReport {
        let r = match self.cfg.tolerances.get(&r.check) {
            Some(&tol) => r.with_tolerance(tol),
            None => r,
        };
        self.failed |= !r.pass;
        self.line(format!(
            "{} {} {} worst={:.3e} tol={:.3e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            name,
            r.worst_margin,
            r.tolerance
        ));
        r
    }
}

fn summary_csv(reports: &[CheckReport]) -> String {
    let mut out = String::from("check,worst_margin,tolerance,pass\n");
    for r in reports {
        writeln!(
            out,
            "{},{},{},{}",
            r.check, r.worst_margin, r.tolerance, r.pass
        )
        .expect("write to string");
    }
    out
}

fn lambda_fn(src: &str) -> Result<Fn2, CliError> {
    let e = Expr::parse(src, &["t", "x"]).map_err(|e| cfg_err(e.0))?;
    Ok(Arc::new(move |t, x| e.eval(&[t, x])))
}

fn build_triple(
    cfg: &RunConfig,
    kind: BuilderKind,
    spec: &HamiltonianSpec,
    policy: &GridPolicy,
) -> Result<RepresentationTriple, CliError> {
    let built = match kind {
        BuilderKind::Noncompact => build_noncompact(spec, policy),
        BuilderKind::Compact => {
            let lam = match (&cfg.lambda, &spec.lambda_bound) {
                (Some(src), _) => lambda_fn(src)?,
                (None, Some(b)) => b.clone(),
                (None, None) => {
                    return Err(cfg_err(format!(
                        "compact build of {} needs `lambda`",
                        spec.name
                    )))
                }
            };
            build_compact(spec, lam, policy)
        }
    };
    built.map_err(|e| cfg_err(e.to_string()))
}

/// Execute one config. Config and IO problems are errors (exit 1); check
/// failures give exit code 2.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let policy = cfg.policy()?;
    let mut sink = Sink {
        cfg,
        quiet: opts.quiet,
        lines: Vec::new(),
        artifacts: Vec::new(),
        failed: false,
    };
    if cfg.command == Command::ZooList {
        let list = zoo::list();
        for e in &list {
            sink.line(e.name.to_string());
        }
        sink.json("all", &list)?;
        sink.meta("all")?;
        return Ok(RunOutcome {
            exit_code: 0,
            lines: sink.lines,
            artifacts: sink.artifacts,
        });
    }
    if cfg.command == Command::Geometry {
        let reports =
            crate::convex_geom::geometry_suite(cfg.seed, cfg.pairs, cfg.grids.steiner_dirs)
                .map_err(|e| cfg_err(e.to_string()))?;
        let reports: Vec<CheckReport> = reports
            .into_iter()
            .map(|r| sink.judge("polygons", r))
            .collect();
        sink.write("polygons", "csv", &summary_csv(&reports))?;
        sink.json("polygons", &reports)?;
        sink.meta("polygons")?;
        let exit_code = if sink.failed { 2 } else { 0 };
        return Ok(RunOutcome {
            exit_code,
            lines: sink.lines,
            artifacts: sink.artifacts,
        });
    }
    if cfg.command == Command::Compactness && cfg.pipeline {
        let t = cfg.at().t;
        let states: Vec<(f64, f64)> = linspace(-1.0, 1.0, 5).into_iter().map(|x| (t, x)).collect();
        let reports = pipeline_checks(&states, &policy).map_err(|e| cfg_err(e.to_string()))?;
        let reports: Vec<CheckReport> = reports
            .into_iter()
            .map(|r| sink.judge("pipeline", r))
            .collect();
        sink.write("pipeline", "csv", &summary_csv(&reports))?;
        sink.json("pipeline", &reports)?;
        sink.meta("pipeline")?;
    }
    for spec in cfg.hamiltonians(&opts.base_dir)? {
        let name = spec.name.clone();
        match cfg.command {
            Command::Conjugate => run_conjugate(&mut sink, &spec, &policy)?,
            Command::Check => run_check(&mut sink, &spec, &policy)?,
            Command::Represent => run_represent(&mut sink, &spec, &policy)?,
            Command::Verify => run_verify(&mut sink, &spec, &policy)?,
            Command::Compactness => run_compactness(&mut sink, &spec, &policy)?,
            Command::Stability => run_stability(&mut sink, &spec, &policy)?,
            Command::Geometry | Command::ZooList => unreachable!("handled above"),
        }
        sink.meta(&name)?;
    }
    let exit_code = if sink.failed { 2 } else { 0 };
    Ok(RunOutcome {
        exit_code,
        lines: sink.lines,
        artifacts: sink.artifacts,
    })
}

#[derive(Serialize)]
struct ConjugateOut {
    hamiltonian: String,
    t: f64,
    xs: Vec<f64>,
    reports: Vec<CheckReport>,
    /// which closed form the transform matches, when two are on file
    #[serde(skip_serializing_if = "Option::is_none")]
    matches: Option<String>,
}

fn run_conjugate(
    sink: &mut Sink,
    spec: &HamiltonianSpec,
    policy: &GridPolicy,
) -> Result<(), CliError> {
    let cfg = sink.cfg;
    let at = cfg.at();
    let xs = cfg.xs(&spec.name);
    let h = spec.h_slice(at.t, at.x, policy.p_grid);
    let w = spec.v_half_width(at.t, at.x, policy);
    let out_grid = match cfg.grids.v_count {
        Some(n) => UniformGrid::new(-w, w, n),
        None => UniformGrid::symmetric(w, policy.v_step),
    }
    .map_err(|e| cfg_err(e.to_string()))?;
    let l = conjugate_windowed(&h, out_grid).map_err(|e| cfg_err(e.to_string()))?;
    sink.write(&spec.name, "csv", &l.to_csv())?;
    let mut reports = Vec::new();
    let mut matches = None;
    if let Some(oracle) = &spec.oracle_l {
        let r = check_conjugate_oracle(spec, oracle, at.t, &xs, 0.1, policy);
        match &spec.printed_l {
            Some(printed) => {
                let mut p = check_conjugate_oracle(spec, printed, at.t, &xs, 0.1, policy);
                p.check = "conjugate_printed".into();
                let tol = cfg
                    .tolerances
                    .get("conjugate_oracle")
                    .copied()
                    .unwrap_or(r.tolerance);
                let (d, q) = (r.worst_margin <= tol, p.worst_margin <= tol);
                matches = Some(
                    match (d, q) {
                        (true, false) => "derived",
                        (false, true) => "printed",
                        (true, true) => "both",
                        (false, false) => "neither",
                    }
                    .to_string(),
                );
                let exactly_one = CheckReport::single(
                    "conjugate_exactly_one_form",
                    &[("t", at.t)],
                    if d != q { 0.0 } else { 1.0 },
                    0.0,
                );
                sink.line(format!(
                    "INFO {} matches the {} form",
                    spec.name,
                    matches.as_deref().unwrap_or("")
                ));
                reports.push(sink.judge(&spec.name, exactly_one));
                reports.push(r);
                reports.push(p);
            }
            None => reports.push(sink.judge(&spec.name, r)),
        }
    }
    if let Some(pc) = cfg.perturbation.as_ref().and_then(|p| p.list().first()) {
        let e = Expr::parse(&pc.expr, &["i", "t", "x", "p"]).map_err(|e| cfg_err(e.0))?;
        let h2 = crate::fenchel::ConvexGridFunction::sample(policy.p_grid, |p| {
            e.eval(&[1.0, at.t, at.x, p])
        })
        .map_err(|e| cfg_err(e.to_string()))?;
        let r = check_sum_rule(&h, &h2, out_grid).map_err(|e| cfg_err(e.to_string()))?;
        reports.push(sink.judge(&spec.name, r));
    }
    let out = ConjugateOut {
        hamiltonian: spec.name.clone(),
        t: at.t,
        xs,
        reports,
        matches,
    };
    sink.json(&spec.name, &out)
}

fn run_check(sink: &mut Sink, spec: &HamiltonianSpec, policy: &GridPolicy) -> Result<(), CliError> {
    let cfg = sink.cfg;
    let spec = match cfg.mutation {
        Some(Mutation::HalveK) => {
            let (lo, hi) = spec.t_range;
            if linspace(lo, hi, 9)
                .iter()
                .all(|&t| spec.k(cfg.r_ball, t) == 0.0)
            {
                spec.clone().with_halved_w()
            } else {
                spec.clone().with_halved_k()
            }
        }
        Some(Mutation::HalveW) => spec.clone().with_halved_w(),
        None => spec.clone(),
    };
    let plan = cfg.plan();
    let eq = check_equivalence(&spec, cfg.r_ball, &plan, policy);
    let mut reports = vec![eq.hlc, eq.llc, eq.mlc];
    reports.push(check_epigraph_hausdorff(&spec, cfg.r_ball, &plan, policy));
    let reports: Vec<CheckReport> = reports
        .into_iter()
        .map(|r| sink.judge(&spec.name, r))
        .collect();
    let consistent = reports[0].pass == reports[1].pass && reports[1].pass == reports[2].pass;
    if !consistent {
        sink.line(format!("WARN {}: the three conditions disagree", spec.name));
    }
    sink.write(&spec.name, "csv", &summary_csv(&reports))?;
    sink.json(
        &spec.name,
        &serde_json::json!({
            "hamiltonian": spec.name,
            "mutation": cfg.mutation,
            "r_ball": cfg.r_ball,
            "consistent": consistent,
            "reports": reports,
        }),
    )
}

fn run_represent(
    sink: &mut Sink,
    spec: &HamiltonianSpec,
    policy: &GridPolicy,
) -> Result<(), CliError> {
    let cfg = sink.cfg;
    let kinds = cfg.builders();
    if kinds.len() != 1 {
        return Err(cfg_err("`represent` takes a single builder"));
    }
    let triple = build_triple(cfg, kinds[0], spec, policy)?;
    let at = cfg.at();
    let plan = cfg.grids.a_plan.unwrap_or_else(|| triple.default_plan());
    let mut points: Vec<(f64, f64, Vec2)> = Vec::new();
    for &x in &cfg.xs(&spec.name) {
        let controls = triple
            .controls(at.t, x, &plan)
            .map_err(|e| cfg_err(e.to_string()))?;
        points.extend(controls.into_iter().map(|a| (at.t, x, a)));
    }
    let csv = triple
        .trace_csv(&points)
        .map_err(|e| cfg_err(e.to_string()))?;
    sink.write(&spec.name, "csv", &csv)?;
    let report =
        verify_triple(&triple, &cfg.window(), &cfg.plan()).map_err(|e| cfg_err(e.to_string()))?;
    let checks: Vec<CheckReport> = report
        .checks
        .iter()
        .cloned()
        .map(|r| sink.judge(&spec.name, r))
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    sink.json(
        &spec.name,
        &crate::builder::VerifyReport {
            checks,
            pass,
            ..report
        },
    )
}

fn run_verify(
    sink: &mut Sink,
    spec: &HamiltonianSpec,
    policy: &GridPolicy,
) -> Result<(), CliError> {
    let cfg = sink.cfg;
    let at = cfg.at();
    let ps = cfg.ps();
    let xs = cfg.xs(&spec.name);
    let mut csv = String::from("builder,t,x,p,h,reconstructed\n");
    let mut runs = Vec::new();
    for kind in cfg.builders() {
        let triple = build_triple(cfg, kind, spec, policy)?;
        let label = format!("{}/{}", spec.name, kind.as_str());
        let mut err = WorstTracker::new(3);
        let mut over = WorstTracker::new(3);
        for &x in &xs {
            let r = triple
                .reconstruct(at.t, x, &ps)
                .map_err(|e| cfg_err(e.to_string()))?;
            for (&p, &v) in ps.iter().zip(&r) {
                let h = spec.h(at.t, x, p);
                writeln!(csv, "{},{},{x},{p},{h},{v}", kind.as_str(), at.t)
                    .expect("write to string");
                err.push(&[("t", at.t), ("x", x), ("p", p)], (v - h).abs());
                over.push(&[("t", at.t), ("x", x), ("p", p)], v - h);
            }
        }
        let mut checks = vec![
            sink.judge(&label, err.finish("reconstruction", 5e-2)),
            sink.judge(&label, over.finish("inner_approximation", 2e-2)),
        ];
        let plan = cfg.grids.a_plan.unwrap_or_else(|| triple.default_plan());
        let mut image = WorstTracker::new(3);
        for &x in &xs {
            let r =
                image_of_controls(&triple, at.t, x, &plan).map_err(|e| cfg_err(e.to_string()))?;
            image.push(&[("t", at.t), ("x", x)], r.gap);
        }
        checks.push(sink.judge(&label, image.finish("image_identity", 0.05)));
        if kind == BuilderKind::Compact {
            let states: Vec<(f64, f64)> = xs.iter().map(|&x| (at.t, x)).collect();
            let r = sandwich_check(&triple, &states, &plan).map_err(|e| cfg_err(e.to_string()))?;
            checks.push(sink.judge(&label, r));
        }
        let v = verify_triple(&triple, &cfg.window(), &cfg.plan())
            .map_err(|e| cfg_err(e.to_string()))?;
        checks.extend(v.checks.into_iter().map(|r| sink.judge(&label, r)));
        let pass = checks.iter().all(|c| c.pass);
        runs.push(serde_json::json!({
            "builder": kind,
            "provenance": triple.provenance(),
            "checks": checks,
            "pass": pass,
        }));
    }
    sink.write(&spec.name, "csv", &csv)?;
    sink.json(
        &spec.name,
        &serde_json::json!({ "hamiltonian": spec.name, "t": at.t, "xs": xs, "runs": runs }),
    )
}

fn run_compactness(
    sink: &mut Sink,
    spec: &HamiltonianSpec,
    policy: &GridPolicy,
) -> Result<(), CliError> {
    let cfg = sink.cfg;
    let t = cfg.at().t;
    let xs = cfg
        .xs_for(&spec.name)
        .unwrap_or_else(|| linspace(cfg.window.x_range.0, cfg.window.x_range.1, 5));
    let states: Vec<(f64, f64)> = xs.into_iter().map(|x| (t, x)).collect();
    let r = detect_blc_failure(spec, &states, &BLC_MARGINS, policy);
    sink.line(format!("VERDICT {} {}", spec.name, r.verdict));
    let mut csv = String::from("t,x,sup_1e-1,sup_1e-2,sup_1e-3,diverging\n");
    for row in &r.rows {
        let s: Vec<String> = row.sups.iter().map(|v| v.to_string()).collect();
        writeln!(csv, "{},{},{},{}", row.t, row.x, s.join(","), row.diverging)
            .expect("write to string");
    }
    sink.write(&spec.name, "csv", &csv)?;
    sink.json(&spec.name, &r)
}

fn run_stability(
    sink: &mut Sink,
    spec: &HamiltonianSpec,
    policy: &GridPolicy,
) -> Result<(), CliError> {
    let cfg = sink.cfg;
    let all = cfg
        .perturbation
        .as_ref()
        .ok_or_else(|| cfg_err("`stability` needs a `perturbation`"))?;
    for pc in all
        .list()
        .iter()
        .filter(|pc| pc.hamiltonian.as_ref().is_none_or(|h| *h == spec.name))
    {
        run_family(sink, spec, pc, policy)?;
    }
    Ok(())
}

fn run_family(
    sink: &mut Sink,
    spec: &HamiltonianSpec,
    pc: &PerturbationConfig,
    policy: &GridPolicy,
) -> Result<(), CliError> {
    let cfg = sink.cfg;
    let label = format!("{}-{}", spec.name, pc.name.as_deref().unwrap_or(&pc.expr));
    let e = Expr::parse(&pc.expr, &["i", "t", "x", "p"]).map_err(|e| cfg_err(e.0))?;
    let mut fam = PerturbationFamily::new(
        &label,
        spec.clone(),
        Arc::new(move |i, t, x, p| e.eval(&[i as f64, t, x, p])),
    );
    fam.indices = pc.indices.clone();
    if let Some(src) = &pc.lambda {
        let l = Expr::parse(src, &["i", "t", "x"]).map_err(|e| cfg_err(e.0))?;
        fam = fam.with_lambda(Arc::new(move |i, t, x| l.eval(&[i as f64, t, x])));
    }
    let kind = pc.builder.unwrap_or_else(|| cfg.builders()[0]);
    let plan = cfg.plan();
    let r = match pc.fixed_t {
        Some(t) => fixed_t_convergence(&fam, t, kind, &cfg.window(), &plan, policy),
        None => representation_convergence(&fam, kind, &cfg.window(), &plan, policy),
    }
    .map_err(|e| cfg_err(e.to_string()))?;
    for w in &r.warnings {
        sink.line(format!("WARN {label}: {w}"));
    }
    let first = r.rows.first().map_or(0.0, |row| row.sup_e_err);
    let last = r.rows.last().map_or(0.0, |row| row.sup_e_err);
    let head = if pc.zero_control {
        let worst = r
            .rows
            .iter()
            .map(|row| row.sup_e_err.max(row.sup_f_err).max(row.sup_l_err))
            .fold(0.0, f64::max);
        CheckReport::single("zero_control", &[], worst, 0.0)
    } else {
        CheckReport::single(
            "decay",
            &[("first", first), ("last", last)],
            last - DECAY_RATIO * first,
            0.0,
        )
    };
    let bound_margin = r
        .rows
        .iter()
        .map(|row| row.bound_margin)
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = CheckReport::single("steiner_stability_bound", &[], bound_margin, 5e-3);
    let checks = vec![sink.judge(&label, head), sink.judge(&label, bound)];
    sink.write(&label, "csv", &r.to_csv())?;
    sink.json(
        &label,
        &serde_json::json!({ "report": r, "checks": checks }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_validates() {
        let c = RunConfig::from_json(r#"{"command": "check", "hamiltonian": "ex_2_1"}"#).unwrap();
        assert_eq!(c.grids.p_count, 10001);
        assert!(c.validate().is_ok());
        let c = RunConfig::from_json(
            r#"{"command": "check", "hamiltonian": "ex_2_1", "grids": {"p_count": 10}}"#,
        )
        .unwrap();
        assert!(c.validate().is_err());
        assert!(RunConfig::from_json(r#"{"command": "frobnicate"}"#).is_err());
        let c =
            RunConfig::from_json(r#"{"command": "check", "hamiltonian": ["ex_2_1", "ex_2_2"]}"#)
                .unwrap();
        assert_eq!(c.hamiltonians(Path::new(".")).unwrap().len(), 2);
        let c = RunConfig::from_json(r#"{"command": "check", "hamiltonian": "nope"}"#).unwrap();
        assert!(matches!(
            c.hamiltonians(Path::new(".")),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn external_definition() {
        let c = RunConfig::from_json(
            r#"{"command": "check", "hamiltonian": {"name": "half_abs",
                "pieces": [{"expr": "abs(p)/2 - abs(x)"}],
                "modulus": {"c": "1", "k": "0", "w": "r"}}}"#,
        )
        .unwrap();
        let h = c.hamiltonians(Path::new(".")).unwrap();
        assert_eq!(h[0].h(0.0, -1.0, 4.0), 1.0);
    }
}
