//! The two representations: `e(t,x,a) = s(P(M(t,x) a, E_L(t,x)))` with
//! `A = R^2, M = 1` (noncompact) or `A` the unit disc and
//! `M = |lambda| + |H(t,x,0)| + c(t)(1+|x|) + 1` (compact). `f` and `l` are
//! the two coordinates of `e`.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convex_geom::{Polygon, Vec2};
use crate::error::BuildError;
use crate::fenchel::{
    build_bounded_epigraph, build_epigraph, effective_domain, ConvexGridFunction, EffectiveDomain,
};
use crate::report::{par_map, CheckReport, SamplePlan, WorstTracker};
use crate::zoo::{Fn2, GridPolicy, HamiltonianSpec};

/// Slack on sampled `L <= lambda`.
pub const BLC_TOL: f64 = 2e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlSet {
    FullSpace {
        dim: usize,
    },
    UnitBall {
        dim: usize,
    },
    Interval {
        lo: f64,
        hi: f64,
    },
    /// `[lo, hi]^dim`
    Cube {
        dim: usize,
        lo: f64,
        hi: f64,
    },
    UnitCircle,
    /// `A^atoms x simplex`, the control set of a convexified triple
    Convexified {
        base: Box<ControlSet>,
        atoms: usize,
    },
    Finite {
        points: Vec<Vec<f64>>,
    },
}

impl ControlSet {
    pub fn dim(&self) -> usize {
        match self {
            ControlSet::FullSpace { dim }
            | ControlSet::UnitBall { dim }
            | ControlSet::Cube { dim, .. } => *dim,
            ControlSet::Interval { .. } => 1,
            ControlSet::UnitCircle => 2,
            ControlSet::Convexified { base, atoms } => base.dim() * atoms + atoms,
            ControlSet::Finite { points } => points.first().map_or(0, Vec::len),
        }
    }

    pub fn is_compact(&self) -> bool {
        match self {
            ControlSet::FullSpace { .. } => false,
            ControlSet::Convexified { base, .. } => base.is_compact(),
            _ => true,
        }
    }

    /// Regular sample of a compact control set; `res` points per axis (per
    /// radius and per half-turn for discs). `None` for the full space.
    pub fn grid(&self, res: usize) -> Option<Vec<Vec<f64>>> {
        let res = res.max(2);
        let axis = |lo: f64, hi: f64| crate::report::linspace(lo, hi, res);
        Some(match self {
            ControlSet::FullSpace { .. } => return None,
            ControlSet::Interval { lo, hi } => {
                axis(*lo, *hi).into_iter().map(|a| vec![a]).collect()
            }
            ControlSet::Cube { dim, lo, hi } => {
                let ax = axis(*lo, *hi);
                let mut out = vec![vec![]];
                for _ in 0..*dim {
                    out = out
                        .into_iter()
                        .flat_map(|p: Vec<f64>| {
                            ax.iter().map(move |&a| {
                                let mut q = p.clone();
                                q.push(a);
                                q
                            })
                        })
                        .collect();
                }
                out
            }
            ControlSet::UnitBall { dim: 1 } => {
                axis(-1.0, 1.0).into_iter().map(|a| vec![a]).collect()
            }
            ControlSet::UnitBall { dim: 2 } => polar_grid(res, 2 * res)
                .into_iter()
                .map(|a| vec![a.x, a.y])
                .collect(),
            ControlSet::UnitBall { .. } => return None,
            ControlSet::UnitCircle => (0..2 * res)
                .map(|j| {
                    let th = std::f64::consts::PI * j as f64 / res as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect(),
            ControlSet::Convexified { base, atoms } => {
                let pts = base.grid(res)?;
                convex_combination_controls(&pts, *atoms, SIMPLEX_DENOM)
            }
            ControlSet::Finite { points } => points.clone(),
        })
    }
}

/// Barycentric grid denominator on the simplex.
pub const SIMPLEX_DENOM: usize = 8;

/// Weights `alpha` with `sum = 1` and entries in `{0, 1/d, ..., 1}`.
pub fn simplex_grid(atoms: usize, denom: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, slots: usize, denom: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.iter().map(|&k| k as f64 / denom as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(left - k, slots - 1, denom, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(denom, atoms.max(1), denom, &mut Vec::new(), &mut out);
    out
}

fn convex_combination_controls(pts: &[Vec<f64>], atoms: usize, denom: usize) -> Vec<Vec<f64>> {
    let weights = simplex_grid(atoms, denom);
    let mut tuples: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..atoms {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                pts.iter().map(move |p| {
                    let mut q = t.clone();
                    q.extend_from_slice(p);
                    q
                })
            })
            .collect();
    }
    tuples
        .into_iter()
        .flat_map(|t| {
            weights.iter().map(move |w| {
                let mut q = t.clone();
                q.extend_from_slice(w);
                q
            })
        })
        .collect()
}

/// Anything of the form `(A, f, l)` with scalar state.
pub trait Representation: Send + Sync {
    fn name(&self) -> &str;
    fn control(&self) -> &ControlSet;
    /// `(f(t,x,a), l(t,x,a))`
    fn eval(&self, t: f64, x: f64, a: &[f64]) -> Result<(f64, f64), BuildError>;
}

pub type TripleFn = Arc<dyn Fn(f64, f64, &[f64]) -> (f64, f64) + Send + Sync>;

/// A user-supplied triple given by closures.
#[derive(Clone)]
pub struct FnTriple {
    name: String,
    control: ControlSet,
    eval: TripleFn,
}

impl FnTriple {
    pub fn new(name: &str, control: ControlSet, eval: TripleFn) -> Self {
        FnTriple {
            name: name.to_string(),
            control,
            eval,
        }
    }
}

impl std::fmt::Debug for FnTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnTriple")
            .field("name", &self.name)
            .field("control", &self.control)
            .finish()
    }
}

impl Representation for FnTriple {
    fn name(&self) -> &str {
        &self.name
    }
    fn control(&self) -> &ControlSet {
        &self.control
    }
    fn eval(&self, t: f64, x: f64, a: &[f64]) -> Result<(f64, f64), BuildError> {
        Ok((self.eval)(t, x, a))
    }
}

/// `max_a { p f - l }` over the given controls.
pub fn reconstruct_h(
    rep: &dyn Representation,
    t: f64,
    x: f64,
    p: f64,
    a_samples: &[Vec<f64>],
) -> Result<f64, BuildError> {
    let mut best = f64::NEG_INFINITY;
    for a in a_samples {
        let (f, l) = rep.eval(t, x, a)?;
        best = best.max(p * f - l);
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Noncompact,
    Compact,
    UserSupplied,
}

/// Regular control grids for images and reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum APlan {
    /// `per_axis^2` points on `[-half, half]^2`
    Box { half: f64, per_axis: usize },
    /// centre plus `rings` circles of `spokes` points in the unit disc
    Polar { rings: usize, spokes: usize },
}

impl APlan {
    pub fn points(&self) -> Vec<Vec2> {
        match *self {
            APlan::Box { half, per_axis } => {
                let ax = crate::report::linspace(-half, half, per_axis);
                ax.iter()
                    .flat_map(|&u| ax.iter().map(move |&v| Vec2::new(u, v)))
                    .collect()
            }
            APlan::Polar { rings, spokes } => polar_grid(rings, spokes),
        }
    }
}

fn polar_grid(rings: usize, spokes: usize) -> Vec<Vec2> {
    let mut out = vec![Vec2::zeros()];
    for j in 1..=rings {
        let r = j as f64 / rings as f64;
        for s in 0..spokes {
            let th = 2.0 * std::f64::consts::PI * s as f64 / spokes as f64;
            out.push(Vec2::new(r * th.cos(), r * th.sin()));
        }
    }
    out
}

/// Everything needed to evaluate `e(t, x, .)` at one state.
#[derive(Debug)]
pub struct Slice {
    pub t: f64,
    pub x: f64,
    pub l: ConvexGridFunction,
    pub dom: EffectiveDomain,
    pub m: f64,
    pub lambda: Option<f64>,
    lambda_guess: f64,
    cap0: f64,
    base: Polygon,
    dirs: usize,
}

impl Slice {
    /// Truncated `E_L` at the given cap.
    pub fn epigraph(&self, cap: f64) -> Result<Polygon, BuildError> {
        if cap == self.cap0 {
            return Ok(self.base.clone());
        }
        Ok(build_epigraph(&self.l, cap)?.body)
    }

    /// `E_{lambda,L}` (compact slices only).
    pub fn bounded_epigraph(&self) -> Option<Result<Polygon, BuildError>> {
        self.lambda.map(|lam| {
            build_bounded_epigraph(&self.l, lam)
                .map(|e| e.body)
                .map_err(BuildError::from)
        })
    }

    /// `P(y, E_L)` on a polygon whose top edge lies above `y_eta + 6d + 1`,
    /// so the truncation never touches the ball of radius `2d`.
    pub fn phi(&self, y: Vec2) -> Result<Polygon, BuildError> {
        let mut cap = self.cap0.max(y.y.abs() + 10.0);
        let mut body = if cap == self.cap0 {
            Cow::Borrowed(&self.base)
        } else {
            Cow::Owned(self.epigraph(cap)?)
        };
        let d = body.distance(y);
        let needed = y.y.abs().max(self.lambda_guess) + 6.0 * d + 1.0;
        if needed > cap {
            cap = needed;
            body = Cow::Owned(self.epigraph(cap)?);
        }
        Ok(body.proj_map(y)?)
    }

    /// `e = s(P(M a, E_L))`.
    pub fn e(&self, a: Vec2) -> Result<Vec2, BuildError> {
        let y = a * self.m;
        if self.base.distance(y) < 1e-12 {
            return Ok(y);
        }
        Ok(self.phi(y)?.steiner(self.dirs)?)
    }

    /// `(v, L(v))` at every finite node; these lie in `E_L`, so `e` maps
    /// their preimages onto themselves.
    pub fn graph_points(&self) -> Vec<Vec2> {
        let g = self.l.grid();
        let (a, b) = self.l.finite_range();
        (a..=b)
            .map(|i| Vec2::new(g.node(i), self.l.values()[i]))
            .collect()
    }
}

/// A representation built from a Hamiltonian. Slices are computed lazily
/// and memoized per `(t, x)`; evaluation is otherwise pure.
pub struct RepresentationTriple {
    spec: HamiltonianSpec,
    provenance: Provenance,
    control: ControlSet,
    policy: GridPolicy,
    lambda: Option<Fn2>,
    cache: Mutex<HashMap<(u64, u64), Arc<Slice>>>,
}

impl std::fmt::Debug for RepresentationTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RepresentationTriple")
            .field("spec", &self.spec.name)
            .field("provenance", &self.provenance)
            .finish()
    }
}

pub fn build_noncompact(
    spec: &HamiltonianSpec,
    policy: &GridPolicy,
) -> Result<RepresentationTriple, BuildError> {
    if !spec.flags.hlc {
        return Err(BuildError::HypothesisViolation(format!(
            "{} does not satisfy the x-Lipschitz condition",
            spec.name
        )));
    }
    Ok(RepresentationTriple {
        spec: spec.clone(),
        provenance: Provenance::Noncompact,
        control: ControlSet::FullSpace { dim: spec.n + 1 },
        policy: *policy,
        lambda: None,
        cache: Mutex::new(HashMap::new()),
    })
}

pub fn build_compact(
    spec: &HamiltonianSpec,
    lam: Fn2,
    policy: &GridPolicy,
) -> Result<RepresentationTriple, BuildError> {
    if spec.c(spec.t_range.0).is_none() {
        return Err(BuildError::MissingC(spec.name.clone()));
    }
    if !spec.flags.hlc {
        return Err(BuildError::HypothesisViolation(format!(
            "{} does not satisfy the x-Lipschitz condition",
            spec.name
        )));
    }
    Ok(RepresentationTriple {
        spec: spec.clone(),
        provenance: Provenance::Compact,
        control: ControlSet::UnitBall { dim: spec.n + 1 },
        policy: *policy,
        lambda: Some(lam),
        cache: Mutex::new(HashMap::new()),
    })
}

/// One `e` evaluation with its control.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub a: Vec2,
    pub e: Vec2,
}

impl RepresentationTriple {
    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn policy(&self) -> &GridPolicy {
        &self.policy
    }

    pub fn lambda(&self, t: f64, x: f64) -> Option<f64> {
        self.lambda.as_ref().map(|l| l(t, x))
    }

    pub fn slice(&self, t: f64, x: f64) -> Result<Arc<Slice>, BuildError> {
        let key = (t.to_bits(), x.to_bits());
        if let Some(s) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(s.clone());
        }
        let s = Arc::new(self.make_slice(t, x)?);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(key, s.clone());
        Ok(s)
    }

    fn make_slice(&self, t: f64, x: f64) -> Result<Slice, BuildError> {
        let l = self
            .spec
            .try_l_slice(t, x, &self.policy)
            .map_err(|_| BuildError::GridUnderflow { t, x })?;
        let dom = effective_domain(&l);
        let min = l.min_finite();
        let lambda = self.lambda(t, x);
        let m = match lambda {
            Some(lam) => {
                let (a, b) = l.finite_range();
                let top = l.values()[a..=b]
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                if top > lam + BLC_TOL {
                    return Err(BuildError::BlcViolation {
                        t,
                        x,
                        excess: top - lam,
                    });
                }
                let c = self
                    .spec
                    .c(t)
                    .ok_or_else(|| BuildError::MissingC(self.spec.name.clone()))?;
                lam.abs() + self.spec.h(t, x, 0.0).abs() + c * (1.0 + x.abs()) + 1.0
            }
            None => 1.0,
        };
        let lambda_guess = lambda
            .or_else(|| self.spec.lambda_bound.as_ref().map(|b| b(t, x)))
            .unwrap_or(min + 1.0)
            .max(min + 1.0);
        let cap0 = (min + 10.0).max(lambda_guess + 10.0).max(20.0);
        let base = build_epigraph(&l, cap0)?.body;
        Ok(Slice {
            t,
            x,
            l,
            dom,
            m,
            lambda,
            lambda_guess,
            cap0,
            base,
            dirs: self.policy.steiner_dirs,
        })
    }

    pub fn e(&self, t: f64, x: f64, a: Vec2) -> Result<Vec2, BuildError> {
        self.slice(t, x)?.e(a)
    }

    pub fn default_plan(&self) -> APlan {
        match self.provenance {
            Provenance::Compact => APlan::Polar {
                rings: 20,
                spokes: 72,
            },
            _ => APlan::Box {
                half: 3.0,
                per_axis: 41,
            },
        }
    }

    /// Plan points plus the lift controls: `(v, L(v))` for the noncompact
    /// triple, `(v, L(v)) / M` and `(v_end, lambda) / M` for the compact one.
    pub fn controls(&self, t: f64, x: f64, plan: &APlan) -> Result<Vec<Vec2>, BuildError> {
        let s = self.slice(t, x)?;
        let mut pts = plan.points();
        let mut lifts = s.graph_points();
        if let Some(lam) = s.lambda {
            lifts.push(Vec2::new(s.dom.lo, lam));
            lifts.push(Vec2::new(s.dom.hi, lam));
        }
        for z in lifts {
            let a = z / s.m;
            pts.push(
                if self.provenance == Provenance::Compact && a.norm() > 1.0 {
                    a / a.norm()
                } else {
                    a
                },
            );
        }
        Ok(pts)
    }

    pub fn samples(&self, t: f64, x: f64, plan: &APlan) -> Result<Vec<Sample>, BuildError> {
        let s = self.slice(t, x)?;
        self.controls(t, x, plan)?
            .into_iter()
            .map(|a| Ok(Sample { a, e: s.e(a)? }))
            .collect()
    }

    /// `max over the default plan of p f - l`, one value per `p`.
    pub fn reconstruct(&self, t: f64, x: f64, ps: &[f64]) -> Result<Vec<f64>, BuildError> {
        let samples = self.samples(t, x, &self.default_plan())?;
        Ok(ps
            .iter()
            .map(|&p| {
                samples
                    .iter()
                    .map(|s| p * s.e.x - s.e.y)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect())
    }

    /// `t,x,a1,a2,f,l` rows.
    pub fn trace_csv(&self, points: &[(f64, f64, Vec2)]) -> Result<String, BuildError> {
        let mut out = String::from("t,x,a1,a2,f,l\n");
        for &(t, x, a) in points {
            let e = self.e(t, x, a)?;
            writeln!(out, "{t},{x},{},{},{},{}", a.x, a.y, e.x, e.y).expect("write to string");
        }
        Ok(out)
    }
}

impl Representation for RepresentationTriple {
    fn name(&self) -> &str {
        &self.spec.name
    }
    fn control(&self) -> &ControlSet {
        &self.control
    }
    fn eval(&self, t: f64, x: f64, a: &[f64]) -> Result<(f64, f64), BuildError> {
        let e = self.e(t, x, Vec2::new(a[0], a[1]))?;
        Ok((e.x, e.y))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ImageReport {
    pub lo: f64,
    pub hi: f64,
    pub dom: EffectiveDomain,
    pub gap: f64,
}

pub const SANDWICH_TOL: f64 = 0.05;

/// `E_{lambda,L} ⊂ hull(e-samples) ⊂ E_L` at each state, as the larger of the
/// two containment gaps. Compact triples only.
pub fn sandwich_check(
    triple: &RepresentationTriple,
    states: &[(f64, f64)],
    plan: &APlan,
) -> Result<CheckReport, BuildError> {
    let mut w = WorstTracker::new(3);
    for &(t, x) in states {
        let s = triple.slice(t, x)?;
        let Some(inner) = s.bounded_epigraph() else {
            return Err(BuildError::HypothesisViolation(
                "sandwich needs a compact triple".into(),
            ));
        };
        let inner = inner?;
        let es: Vec<Vec2> = triple
            .samples(t, x, plan)?
            .into_iter()
            .map(|p| p.e)
            .collect();
        let hull = Polygon::hull(&es)?;
        let cap = es.iter().map(|e| e.y).fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let outer = s.epigraph(cap)?;
        w.push(
            &[("t", t), ("x", x), ("side", 0.0)],
            hull.containment_gap(&inner),
        );
        w.push(
            &[("t", t), ("x", x), ("side", 1.0)],
            outer.containment_gap(&hull),
        );
    }
    Ok(w.finish("sandwich", SANDWICH_TOL))
}

/// Interval hull of sampled `f` against the closure of `dom L`, taken from
/// the closed form when there is one.
pub fn image_of_controls(
    triple: &RepresentationTriple,
    t: f64,
    x: f64,
    plan: &APlan,
) -> Result<ImageReport, BuildError> {
    let samples = triple.samples(t, x, plan)?;
    let lo = samples.iter().map(|s| s.e.x).fold(f64::INFINITY, f64::min);
    let hi = samples
        .iter()
        .map(|s| s.e.x)
        .fold(f64::NEG_INFINITY, f64::max);
    let numeric = triple.slice(t, x)?.dom;
    let dom = match &triple.spec.oracle_dom {
        Some(d) => {
            let d = d(t, x);
            if d.lo.is_finite() && d.hi.is_finite() {
                d
            } else {
                numeric
            }
        }
        None => numeric,
    };
    let r = EffectiveDomain::closed(lo, hi);
    Ok(ImageReport {
        lo,
        hi,
        dom,
        gap: r.closure_gap(&dom),
    })
}

/// Where `verify_triple` samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t_range: (f64, f64),
    pub x_range: (f64, f64),
    pub p_range: (f64, f64),
}

impl Default for Window {
    fn default() -> Self {
        Window {
            t_range: (0.0, 1.0),
            x_range: (-1.0, 1.0),
            p_range: (-3.0, 3.0),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub triple: String,
    pub provenance: Provenance,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

/// Lower bound on `l`, growth of `f`, the Lipschitz block in the stated
/// combined form and in the mixed form of its proof, membership `e in E_L`
/// and the image identity.
pub fn verify_triple(
    triple: &RepresentationTriple,
    window: &Window,
    plan: &SamplePlan,
) -> Result<VerifyReport, BuildError> {
    let spec = &triple.spec;
    let h = triple.policy.v_step;
    let n1 = (spec.n + 1) as f64;
    let compact = triple.provenance == Provenance::Compact;
    let r_ball = window.x_range.0.abs().max(window.x_range.1.abs());
    let triples = plan.triples_in(window.t_range, window.x_range);
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut draw_a = || loop {
        let a = Vec2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        if compact {
            if a.norm() <= 1.0 {
                return a;
            }
        } else {
            return a * 3.0;
        }
    };
    let jobs: Vec<_> = triples
        .iter()
        .map(|&(t, x, y)| (t, x, y, draw_a(), draw_a()))
        .collect();
    type Trackers = [WorstTracker; 5];
    let per = par_map(&jobs, |&(t, x, y, a, b)| -> Result<Trackers, BuildError> {
        let mut w: Trackers = std::array::from_fn(|_| WorstTracker::new(3));
        let (sx, sy) = (triple.slice(t, x)?, triple.slice(t, y)?);
        let (ea, eb) = (sx.e(a)?, sy.e(b)?);
        let at = [
            ("t", t),
            ("x", x),
            ("y", y),
            ("a1", a.x),
            ("a2", a.y),
            ("b1", b.x),
            ("b2", b.y),
        ];
        w[0].push(&at, -spec.h(t, x, 0.0).abs() - ea.y);
        if let Some(c) = spec.c(t) {
            w[1].push(&at, ea.x.abs() - c * (1.0 + x.abs()));
        }
        let d = (x - y).abs();
        let kw = spec.k(r_ball, t) * d + spec.w(r_ball, t, d);
        let da = if compact {
            (a * sx.m - b * sy.m).norm()
        } else {
            (a - b).norm()
        };
        let gap = (ea - eb).norm();
        w[2].push(&at, gap - 10.0 * n1 * (kw + da));
        w[3].push(&at, gap - 10.0 * n1 * kw - 5.0 * n1 * da);
        let body = sx.epigraph(ea.y.abs() + sx.cap0 + 1.0)?;
        w[4].push(&at, body.distance(ea));
        Ok(w)
    });
    let mut all: Trackers = std::array::from_fn(|_| WorstTracker::new(3));
    for r in per {
        for (acc, w) in all.iter_mut().zip(r?) {
            acc.merge(w);
        }
    }
    let [lower, growth, lip, mixed, member] = all;
    let mut checks = vec![
        lower.finish("l_lower_bound", BLC_TOL),
        growth.finish("f_growth", 2.0 * h),
        lip.finish("lipschitz", 5e-3 + 4.0 * h),
        mixed.finish("lipschitz_mixed", 5e-3 + 4.0 * h),
        member.finish("membership", 2.0 * h),
    ];
    let mut image = WorstTracker::new(3);
    let plan_a = triple.default_plan();
    for &(t, x, _) in triples.iter().take(8) {
        let r = image_of_controls(triple, t, x, &plan_a)?;
        image.push(&[("t", t), ("x", x)], r.gap);
    }
    checks.push(image.finish("image", 0.05));
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        triple: spec.name.clone(),
        provenance: triple.provenance,
        checks,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::builtin;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simplex_grid_sizes() {
        assert_eq!(simplex_grid(2, 8).len(), 9);
        assert_eq!(simplex_grid(3, 8).len(), 45);
        assert!(simplex_grid(3, 8)
            .iter()
            .all(|w| (w.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn control_grids() {
        assert_eq!(
            ControlSet::Cube {
                dim: 2,
                lo: -1.0,
                hi: 1.0
            }
            .grid(5)
            .unwrap()
            .len(),
            25
        );
        assert!(ControlSet::FullSpace { dim: 2 }.grid(5).is_none());
        let c = ControlSet::Convexified {
            base: Box::new(ControlSet::Interval { lo: -1.0, hi: 1.0 }),
            atoms: 2,
        };
        assert_eq!(c.dim(), 4);
        assert_eq!(c.grid(3).unwrap().len(), 9 * 9);
    }

    #[test]
    fn points_of_the_epigraph_are_fixed() {
        let tr = build_noncompact(&builtin("ex_2_2").unwrap(), &GridPolicy::default()).unwrap();
        let a = Vec2::new(0.0, 0.5);
        assert_eq!(tr.e(0.3, 0.0, a).unwrap(), a);
    }

    #[test]
    fn below_the_epigraph() {
        let tr = build_noncompact(&builtin("ex_2_2").unwrap(), &GridPolicy::default()).unwrap();
        let s = tr.slice(0.0, 0.0).unwrap();
        let y = Vec2::new(0.0, -5.0);
        assert_abs_diff_eq!(s.base.distance(y), 4.0, epsilon = 1e-3);
        let e = s.e(y).unwrap();
        assert!(s.base.distance(e) < 2e-2);
        assert!(e.y >= -1.0 - 1e-6);
    }

    #[test]
    fn reconstruction_ex_2_2() {
        let tr = build_noncompact(&builtin("ex_2_2").unwrap(), &GridPolicy::default()).unwrap();
        let r = tr.reconstruct(0.0, 0.0, &[1.0]).unwrap();
        assert_abs_diff_eq!(r[0], 2f64.sqrt(), epsilon = 5e-2);
        let tr = build_noncompact(&builtin("ex_2_1").unwrap(), &GridPolicy::default()).unwrap();
        assert_abs_diff_eq!(
            tr.reconstruct(0.0, 1.0, &[0.0]).unwrap()[0],
            0.0,
            epsilon = 5e-2
        );
    }

    #[test]
    fn compact_scaling_and_errors() {
        let s = builtin("ex_2_2").unwrap();
        let tr = build_compact(&s, Arc::new(|_, x| x.abs()), &GridPolicy::default()).unwrap();
        assert_abs_diff_eq!(tr.slice(0.0, 0.0).unwrap().m, 3.0);
        assert!(matches!(
            build_compact(
                &builtin("ex_2_5").unwrap(),
                Arc::new(|_, _| 1.0),
                &GridPolicy::default()
            ),
            Err(BuildError::MissingC(_))
        ));
        let bad = build_compact(&s, Arc::new(|_, _| -1.0), &GridPolicy::default()).unwrap();
        assert!(matches!(
            bad.slice(0.0, 0.5),
            Err(BuildError::BlcViolation { .. })
        ));
    }

    #[test]
    fn compact_sandwich() {
        let tr = build_compact(
            &builtin("ex_2_2").unwrap(),
            Arc::new(|_, x| x.abs()),
            &GridPolicy::default(),
        )
        .unwrap();
        let states = [(0.5, -1.0), (0.5, 0.0), (0.5, 1.0)];
        let r = sandwich_check(&tr, &states, &tr.default_plan()).unwrap();
        assert!(r.pass, "{r:?}");
        let nc = build_noncompact(&builtin("ex_2_2").unwrap(), &GridPolicy::default()).unwrap();
        assert!(sandwich_check(&nc, &states, &nc.default_plan()).is_err());
    }

    #[test]
    fn image_ex_2_1() {
        let tr = build_noncompact(&builtin("ex_2_1").unwrap(), &GridPolicy::default()).unwrap();
        let r = image_of_controls(&tr, 0.0, 0.5, &tr.default_plan()).unwrap();
        assert!(r.gap <= 0.05, "{r:?}");
        let r = image_of_controls(&tr, 0.0, 0.0, &tr.default_plan()).unwrap();
        assert!(r.gap <= 0.01, "{r:?}");
    }

    #[test]
    fn trace_is_csv() {
        let tr = build_noncompact(&builtin("p_abs").unwrap(), &GridPolicy::default()).unwrap();
        let csv = tr.trace_csv(&[(0.0, 0.0, Vec2::new(0.0, 0.0))]).unwrap();
        assert_eq!(csv, "t,x,a1,a2,f,l\n0,0,0,0,0,0\n");
    }
}
