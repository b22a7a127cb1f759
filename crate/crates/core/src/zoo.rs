//! Built-in Hamiltonians with closed-form Lagrangians and hand-derived
//! moduli, and the three equivalent Lipschitz-type conditions.
//!
//! | name    | H(t,x,p)                              | c | k_R | w_R(r) |
//! |---------|---------------------------------------|---|-----|--------|
//! | ex_2_1  | max(|p||x| - 1, 0)                    | 1 | 1   | 0      |
//! | ex_2_2  | sqrt(1+p^2) - |x|                     | 1 | 0   | r      |
//! | ex_2_3  | p-1-|x| (p >= -1), -2 sqrt(-p) - |x|  | 1 | 0   | r      |
//! | ex_2_4  | (sqrt|xp| - 1)^2 if |xp| > 1, else 0  | 1 | 1   | 0      |
//! | ex_2_5  | p^2/(2+2t) - |x|                      | - | 0   | r      |
//! | ex_3_4  | |x| max(|p| - |ln t|, 0), 0 at t = 0  | 1 | 1   | 0      |
//! | p_abs   | |p|                                   | 1 | 0   | 0      |
//!
//! `c` bounds the p-Lipschitz constant by `c(t)(1+|x|)`. For ex_2_4 the
//! p-slope is `|x| - sqrt(|x|/|p|) < |x|`; its x-dependence goes through
//! `g(|x||p|)` with `g' <= 1`, hence `k = 1`. ex_2_5 grows quadratically in
//! `p` and has no `c`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::builder::{ControlSet, FnTriple};
use crate::error::{FenchelError, ZooError};
use crate::expr::{Expr, PieceSource, Piecewise};
use crate::fenchel::{
    build_epigraph, conjugate_at, conjugate_windowed, ConvexGridFunction, EffectiveDomain,
    UniformGrid,
};
use crate::report::{par_map, CheckReport, SamplePlan, WorstTracker};

pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type Fn3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type DomFn = Arc<dyn Fn(f64, f64) -> EffectiveDomain + Send + Sync>;

pub const BUILTIN_NAMES: &[&str] = &[
    "ex_2_1", "ex_2_2", "ex_2_3", "ex_2_4", "ex_2_5", "ex_3_4", "p_abs",
];

#[derive(Clone)]
pub struct ModulusData {
    /// `c(t)`; `None` when the linear growth bound fails.
    pub c: Option<Fn1>,
    /// `k_R(t)` as a function of `(R, t)`.
    pub k: Fn2,
    /// `w_R(t, r)` as a function of `(R, t, r)`.
    pub w: Fn3,
    pub null_set_note: String,
}

impl ModulusData {
    pub fn constant(c: Option<f64>, k: f64, w_slope: f64) -> Self {
        ModulusData {
            c: c.map(|c| Arc::new(move |_| c) as Fn1),
            k: Arc::new(move |_, _| k),
            w: Arc::new(move |_, _, r| w_slope * r),
            null_set_note: String::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisFlags {
    /// linear growth bound
    pub growth: bool,
    /// the x-Lipschitz condition on H
    pub hlc: bool,
}

#[derive(Clone)]
pub struct HamiltonianSpec {
    pub name: String,
    eval: Fn3,
    pub t_range: (f64, f64),
    pub n: usize,
    pub modulus: ModulusData,
    pub oracle_l: Option<Fn3>,
    pub oracle_dom: Option<DomFn>,
    pub lambda_bound: Option<Fn2>,
    /// A closed form that appears in print but disagrees with the transform.
    pub printed_l: Option<Fn3>,
    pub flags: HypothesisFlags,
}

impl fmt::Debug for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSpec")
            .field("name", &self.name)
            .field("t_range", &self.t_range)
            .field("flags", &self.flags)
            .field("oracle", &self.oracle_l.is_some())
            .finish()
    }
}

fn closed(lo: f64, hi: f64) -> EffectiveDomain {
    EffectiveDomain::closed(lo, hi)
}

fn ind(ok: bool, v: f64) -> f64 {
    if ok {
        v
    } else {
        f64::INFINITY
    }
}

/// Look up a built-in by name (`ex_2_6` and `ex_6` alias `ex_3_4`).
pub fn builtin(name: &str) -> Result<HamiltonianSpec, ZooError> {
    let spec = |name: &str, eval: Fn3, m: ModulusData| HamiltonianSpec {
        name: name.to_string(),
        eval,
        t_range: (0.0, 1.0),
        n: 1,
        flags: HypothesisFlags {
            growth: m.c.is_some(),
            hlc: true,
        },
        modulus: m,
        oracle_l: None,
        oracle_dom: None,
        lambda_bound: None,
        printed_l: None,
    };
    let s = match name {
        "ex_2_1" => HamiltonianSpec {
            oracle_l: Some(Arc::new(|_, x, v| {
                if x == 0.0 {
                    ind(v == 0.0, 0.0)
                } else {
                    ind(v.abs() <= x.abs(), (v / x).abs())
                }
            })),
            oracle_dom: Some(Arc::new(|_, x| closed(-x.abs(), x.abs()))),
            lambda_bound: Some(Arc::new(|_, x| 1.0 + x.abs())),
            ..spec(
                name,
                Arc::new(|_, x, p| (p.abs() * x.abs() - 1.0).max(0.0)),
                ModulusData::constant(Some(1.0), 1.0, 0.0),
            )
        },
        "ex_2_2" => HamiltonianSpec {
            oracle_l: Some(Arc::new(|_, x, v| {
                ind(v.abs() <= 1.0, -(1.0 - v * v).sqrt() + x.abs())
            })),
            oracle_dom: Some(Arc::new(|_, _| closed(-1.0, 1.0))),
            lambda_bound: Some(Arc::new(|_, x| x.abs())),
            ..spec(
                name,
                Arc::new(|_, x, p| (1.0 + p * p).sqrt() - x.abs()),
                ModulusData::constant(Some(1.0), 0.0, 1.0),
            )
        },
        "ex_2_3" => HamiltonianSpec {
            oracle_l: Some(Arc::new(|_, x, v| {
                ind(v > 0.0 && v <= 1.0, 1.0 / v + x.abs())
            })),
            oracle_dom: Some(Arc::new(|_, _| EffectiveDomain {
                lo: 0.0,
                hi: 1.0,
                lo_closed: false,
                hi_closed: true,
            })),
            ..spec(
                name,
                Arc::new(|_, x, p| {
                    if p >= -1.0 {
                        p - 1.0 - x.abs()
                    } else {
                        -2.0 * (-p).sqrt() - x.abs()
                    }
                }),
                ModulusData::constant(Some(1.0), 0.0, 1.0),
            )
        },
        "ex_2_4" => HamiltonianSpec {
            oracle_l: Some(Arc::new(|_, x, v| {
                if x == 0.0 {
                    ind(v == 0.0, 0.0)
                } else {
                    ind(v.abs() < x.abs(), v.abs() / (x.abs() - v.abs()))
                }
            })),
            oracle_dom: Some(Arc::new(|_, x| {
                if x == 0.0 {
                    closed(0.0, 0.0)
                } else {
                    EffectiveDomain {
                        lo: -x.abs(),
                        hi: x.abs(),
                        lo_closed: false,
                        hi_closed: false,
                    }
                }
            })),
            ..spec(
                name,
                Arc::new(|_, x, p| {
                    let s = (x * p).abs();
                    if s > 1.0 {
                        (s.sqrt() - 1.0).powi(2)
                    } else {
                        0.0
                    }
                }),
                ModulusData::constant(Some(1.0), 1.0, 0.0),
            )
        },
        "ex_2_5" => HamiltonianSpec {
            oracle_l: Some(Arc::new(|t, x, v| (1.0 + t) * v * v / 2.0 + x.abs())),
            printed_l: Some(Arc::new(|t, x, v| (1.0 + t) * v * v + x.abs())),
            oracle_dom: Some(Arc::new(|_, _| closed(f64::NEG_INFINITY, f64::INFINITY))),
            ..spec(
                name,
                Arc::new(|t, x, p| p * p / (2.0 + 2.0 * t) - x.abs()),
                ModulusData::constant(None, 0.0, 1.0),
            )
        },
        "ex_3_4" | "ex_2_6" | "ex_6" => HamiltonianSpec {
            oracle_l: Some(Arc::new(|t, x, v| {
                if t == 0.0 {
                    ind(v == 0.0, 0.0)
                } else {
                    ind(v.abs() <= x.abs(), t.ln().abs() * v.abs())
                }
            })),
            oracle_dom: Some(Arc::new(|t, x| {
                if t == 0.0 {
                    closed(0.0, 0.0)
                } else {
                    closed(-x.abs(), x.abs())
                }
            })),
            lambda_bound: Some(Arc::new(|t, x| {
                if t == 0.0 {
                    0.0
                } else {
                    t.ln().abs() * x.abs()
                }
            })),
            ..spec(
                "ex_3_4",
                Arc::new(|t, x, p| {
                    if t == 0.0 {
                        0.0
                    } else {
                        x.abs() * (p.abs() - t.ln().abs()).max(0.0)
                    }
                }),
                ModulusData::constant(Some(1.0), 1.0, 0.0),
            )
        },
        "p_abs" => HamiltonianSpec {
            oracle_l: Some(Arc::new(|_, _, v| ind(v.abs() <= 1.0, 0.0))),
            oracle_dom: Some(Arc::new(|_, _| closed(-1.0, 1.0))),
            lambda_bound: Some(Arc::new(|_, _| 0.0)),
            ..spec(
                name,
                Arc::new(|_, _, p| p.abs()),
                ModulusData::constant(Some(1.0), 0.0, 0.0),
            )
        },
        other => return Err(ZooError::UnknownName(other.to_string())),
    };
    Ok(s)
}

/// Moduli for a user-supplied Hamiltonian, as expressions: `c` in `t`,
/// `k` in `(R, t)`, `w` in `(R, t, r)`.
#[derive(Clone, Debug, PartialEq, serde::Deserialize, Serialize)]
pub struct ModulusSource {
    pub c: Option<String>,
    pub k: String,
    pub w: String,
}

/// Hamiltonian from piecewise expressions in `t, x, p`.
pub fn external(
    name: &str,
    pieces: &[PieceSource],
    modulus: &ModulusSource,
    t_range: (f64, f64),
) -> Result<HamiltonianSpec, ZooError> {
    let err = |e: crate::expr::ExprError| ZooError::Expr(e.0);
    let h = Piecewise::parse(pieces, &["t", "x", "p"]).map_err(err)?;
    let c = modulus
        .c
        .as_deref()
        .map(|s| Expr::parse(s, &["t"]))
        .transpose()
        .map_err(err)?;
    let k = Expr::parse(&modulus.k, &["R", "t"]).map_err(err)?;
    let w = Expr::parse(&modulus.w, &["R", "t", "r"]).map_err(err)?;
    let growth = c.is_some();
    Ok(HamiltonianSpec {
        name: name.to_string(),
        eval: Arc::new(move |t, x, p| h.eval(&[t, x, p])),
        t_range,
        n: 1,
        modulus: ModulusData {
            c: c.map(|c| Arc::new(move |t| c.eval(&[t])) as Fn1),
            k: Arc::new(move |r, t| k.eval(&[r, t])),
            w: Arc::new(move |r, t, d| w.eval(&[r, t, d])),
            null_set_note: String::new(),
        },
        oracle_l: None,
        oracle_dom: None,
        lambda_bound: None,
        printed_l: None,
        flags: HypothesisFlags { growth, hlc: true },
    })
}

/// Where Lagrangian values come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagrangianSource {
    /// closed form when the Hamiltonian has one, numeric transform otherwise
    Oracle,
    /// windowed transform of sampled `H` even when a closed form exists
    Numeric,
}

/// Grids used whenever a Lagrangian slice is materialized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPolicy {
    pub p_grid: UniformGrid,
    pub v_step: f64,
    /// v half-width when the Hamiltonian has no growth bound
    pub v_half_width: f64,
    pub steiner_dirs: usize,
    pub source: LagrangianSource,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy {
            p_grid: UniformGrid::default_p(),
            v_step: 0.01,
            v_half_width: 3.0,
            steiner_dirs: crate::convex_geom::DEFAULT_STEINER_DIRS,
            source: LagrangianSource::Numeric,
        }
    }
}

impl HamiltonianSpec {
    pub fn h(&self, t: f64, x: f64, p: f64) -> f64 {
        (self.eval)(t, x, p)
    }

    pub fn c(&self, t: f64) -> Option<f64> {
        self.modulus.c.as_ref().map(|c| c(t))
    }

    pub fn k(&self, r_ball: f64, t: f64) -> f64 {
        (self.modulus.k)(r_ball, t)
    }

    pub fn w(&self, r_ball: f64, t: f64, r: f64) -> f64 {
        (self.modulus.w)(r_ball, t, r)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same Hamiltonian with every `k_R` halved.
    pub fn with_halved_k(mut self) -> Self {
        let k = self.modulus.k.clone();
        self.modulus.k = Arc::new(move |r, t| 0.5 * k(r, t));
        self
    }

    /// Same Hamiltonian with every `w_R` halved.
    pub fn with_halved_w(mut self) -> Self {
        let w = self.modulus.w.clone();
        self.modulus.w = Arc::new(move |r, t, d| 0.5 * w(r, t, d));
        self
    }

    /// `H + delta`; closed forms and derived moduli no longer apply and are
    /// dropped, except `c` which the caller may restore.
    pub fn plus(&self, name: impl Into<String>, delta: Fn3) -> Self {
        let base = self.eval.clone();
        HamiltonianSpec {
            name: name.into(),
            eval: Arc::new(move |t, x, p| base(t, x, p) + delta(t, x, p)),
            oracle_l: None,
            oracle_dom: None,
            lambda_bound: None,
            printed_l: None,
            ..self.clone()
        }
    }

    /// Half-width of the v-window that holds `dom L(t, x, .)`.
    pub fn v_half_width(&self, t: f64, x: f64, policy: &GridPolicy) -> f64 {
        match self.c(t) {
            Some(c) => c * (1.0 + x.abs()) + 1.0,
            None => policy.v_half_width,
        }
    }

    pub fn h_slice(&self, t: f64, x: f64, p_grid: UniformGrid) -> ConvexGridFunction {
        ConvexGridFunction::sample(p_grid, |p| self.h(t, x, p)).expect("Hamiltonians are finite")
    }

    /// `L(t, x, .)` on the policy's v-grid.
    pub fn try_l_slice(
        &self,
        t: f64,
        x: f64,
        policy: &GridPolicy,
    ) -> Result<ConvexGridFunction, FenchelError> {
        let vg = UniformGrid::symmetric(self.v_half_width(t, x, policy), policy.v_step)?;
        match (&self.oracle_l, policy.source) {
            (Some(l), LagrangianSource::Oracle) => ConvexGridFunction::sample(vg, |v| l(t, x, v)),
            _ => {
                let h = ConvexGridFunction::sample(policy.p_grid, |p| self.h(t, x, p))?;
                conjugate_windowed(&h, vg)
            }
        }
    }

    pub fn l_slice(&self, t: f64, x: f64, policy: &GridPolicy) -> ConvexGridFunction {
        self.try_l_slice(t, x, policy)
            .expect("proper Lagrangian slice")
    }
}

/// Pointwise access to one Lagrangian slice.
pub enum LagrangianView {
    Oracle {
        l: Fn3,
        t: f64,
        x: f64,
        dom: EffectiveDomain,
    },
    Grid {
        l: ConvexGridFunction,
        dom: EffectiveDomain,
    },
}

impl LagrangianView {
    pub fn of(spec: &HamiltonianSpec, t: f64, x: f64, policy: &GridPolicy) -> Self {
        if let (Some(l), Some(dom), LagrangianSource::Oracle) =
            (&spec.oracle_l, &spec.oracle_dom, policy.source)
        {
            let mut d = dom(t, x);
            if !d.lo.is_finite() || !d.hi.is_finite() {
                let w = spec.v_half_width(t, x, policy);
                d = closed(d.lo.max(-w), d.hi.min(w));
            }
            return LagrangianView::Oracle {
                l: l.clone(),
                t,
                x,
                dom: d,
            };
        }
        let l = spec.l_slice(t, x, policy);
        let dom = crate::fenchel::effective_domain(&l);
        LagrangianView::Grid { l, dom }
    }

    pub fn eval(&self, v: f64) -> f64 {
        match self {
            LagrangianView::Oracle { l, t, x, .. } => l(*t, *x, v),
            LagrangianView::Grid { l, .. } => l.value_at(v),
        }
    }

    pub fn dom(&self) -> EffectiveDomain {
        match self {
            LagrangianView::Oracle { dom, .. } | LagrangianView::Grid { dom, .. } => *dom,
        }
    }
}

/// Relative violation of `|H(t,x,p) - H(t,y,p)| <= k |p| |x-y| + w(|x-y|)`.
pub fn check_hlc(spec: &HamiltonianSpec, r_ball: f64, plan: &SamplePlan) -> CheckReport {
    let ps = plan.momenta();
    let mut worst = WorstTracker::new(3);
    for (t, x, y) in plan.triples(spec.t_range, r_ball) {
        let d = (x - y).abs();
        let rhs0 = spec.w(r_ball, t, d);
        let k = spec.k(r_ball, t);
        for &p in &ps {
            let (hx, hy) = (spec.h(t, x, p), spec.h(t, y, p));
            let excess = (hx - hy).abs() - k * p.abs() * d - rhs0;
            let scale = 1.0_f64.max(hx.abs()).max(hy.abs());
            worst.push(&[("t", t), ("x", x), ("y", y), ("p", p)], excess / scale);
        }
    }
    worst.finish("hlc", 1e-9)
}

/// `min` of a convex function on `[a, b]`: coarse scan then golden section.
fn convex_min(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b - a <= 0.0 {
        return f(a);
    }
    let n = 200;
    let mut best = (f64::INFINITY, a);
    for i in 0..=n {
        let u = a + (b - a) * i as f64 / n as f64;
        let y = f(u);
        if y < best.0 {
            best = (y, u);
        }
    }
    if !best.0.is_finite() {
        return best.0;
    }
    let step = (b - a) / n as f64;
    let (mut lo, mut hi) = ((best.1 - step).max(a), (best.1 + step).min(b));
    let g = 0.5 * (5.0_f64.sqrt() - 1.0);
    for _ in 0..60 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.0.min(f(0.5 * (lo + hi)))
}

/// Worst excess of `min_{|u-v| <= k|x-y|} L(t,y,u) - L(t,x,v) - w(|x-y|)`.
pub fn check_llc(
    spec: &HamiltonianSpec,
    r_ball: f64,
    plan: &SamplePlan,
    policy: &GridPolicy,
) -> CheckReport {
    let triples = plan.triples(spec.t_range, r_ball);
    let per = par_map(&triples, |&(t, x, y)| {
        let mut worst = WorstTracker::new(3);
        let lx = LagrangianView::of(spec, t, x, policy);
        let ly = LagrangianView::of(spec, t, y, policy);
        let (dx, dy) = (lx.dom(), ly.dom());
        let d = (x - y).abs();
        // grid domains are only known to one step
        let snap = if matches!(lx, LagrangianView::Grid { .. }) {
            policy.v_step
        } else {
            0.0
        };
        let reach = spec.k(r_ball, t) * d + snap;
        let w = spec.w(r_ball, t, d);
        for i in 0..41 {
            let v = dx.lo + (dx.hi - dx.lo) * i as f64 / 40.0;
            let lv = lx.eval(v);
            if !lv.is_finite() {
                continue;
            }
            let (a, b) = ((v - reach).max(dy.lo), (v + reach).min(dy.hi));
            let best = if a > b + 1e-12 {
                f64::INFINITY
            } else {
                convex_min(&|u| ly.eval(u), a, b.max(a))
            };
            worst.push(&[("t", t), ("x", x), ("y", y), ("v", v)], best - lv - w);
        }
        worst
    });
    let mut all = WorstTracker::new(3);
    per.into_iter().for_each(|w| all.merge(w));
    all.finish("llc", 2e-2)
}

/// `E_L(t,x)` against `E_L(t,y)` inflated by `(k|x-y| B) x (w [-1, 1])`, both
/// orders, on epigraphs truncated at `max(min L) + 3` (the inflated side gets
/// `+ w` so its top edge is not mistaken for a gap).
pub fn check_mlc(
    spec: &HamiltonianSpec,
    r_ball: f64,
    plan: &SamplePlan,
    policy: &GridPolicy,
) -> CheckReport {
    let triples = plan.triples(spec.t_range, r_ball);
    let h = policy.v_step;
    let per = par_map(&triples, |&(t, x, y)| {
        let mut worst = WorstTracker::new(3);
        let d = (x - y).abs();
        let reach = spec.k(r_ball, t) * d;
        let w = spec.w(r_ball, t, d);
        let lx = spec.l_slice(t, x, policy);
        let ly = spec.l_slice(t, y, policy);
        let cap = lx.min_finite().max(ly.min_finite()) + 3.0;
        for (a, b, xa, xb) in [(&lx, &ly, x, y), (&ly, &lx, y, x)] {
            let inner = build_epigraph(a, cap).expect("cap above minimum").body;
            let outer = build_epigraph(b, cap + w)
                .expect("cap above minimum")
                .body
                .minkowski_box(reach, w)
                .expect("nonnegative radii");
            worst.push(
                &[("t", t), ("x", xa), ("y", xb)],
                outer.containment_gap(&inner),
            );
        }
        worst
    });
    let mut all = WorstTracker::new(3);
    per.into_iter().for_each(|w| all.merge(w));
    all.finish("mlc", 2.0 * h + 5e-4)
}

/// Measured Hausdorff distance of truncated epigraphs against
/// `2 k |x-y| + 2 w(|x-y|)`, with `3h` slack.
pub fn check_epigraph_hausdorff(
    spec: &HamiltonianSpec,
    r_ball: f64,
    plan: &SamplePlan,
    policy: &GridPolicy,
) -> CheckReport {
    let triples = plan.triples(spec.t_range, r_ball);
    let per = par_map(&triples, |&(t, x, y)| {
        let d = (x - y).abs();
        let bound = 2.0 * spec.k(r_ball, t) * d + 2.0 * spec.w(r_ball, t, d);
        let lx = spec.l_slice(t, x, policy);
        let ly = spec.l_slice(t, y, policy);
        let cap = lx.min_finite().max(ly.min_finite()) + 3.0;
        let ex = build_epigraph(&lx, cap).expect("cap").body;
        let ey = build_epigraph(&ly, cap).expect("cap").body;
        ((t, x, y), ex.hausdorff(&ey) - bound)
    });
    let mut all = WorstTracker::new(3);
    for ((t, x, y), m) in per {
        all.push(&[("t", t), ("x", x), ("y", y)], m);
    }
    all.finish("epigraph_hausdorff", 3.0 * policy.v_step)
}

/// Literal grid transform of `H(t, x, .)` against a closed form at the
/// v-nodes at least `margin` inside the closed-form domain.
pub fn check_conjugate_oracle(
    spec: &HamiltonianSpec,
    oracle: &Fn3,
    t: f64,
    xs: &[f64],
    margin: f64,
    policy: &GridPolicy,
) -> CheckReport {
    let mut worst = WorstTracker::new(3);
    for &x in xs {
        let h = spec.h_slice(t, x, policy.p_grid);
        let w = spec.v_half_width(t, x, policy);
        let dom = spec.oracle_dom.as_ref().map_or(closed(-w, w), |d| d(t, x));
        let (lo, hi) = (dom.lo.max(-w) + margin, dom.hi.min(w) - margin);
        let vg = UniformGrid::symmetric(w, policy.v_step).expect("positive width");
        for v in vg.nodes().filter(|&v| v >= lo && v <= hi) {
            let num = conjugate_at(&h, v).expect("finite slice");
            worst.push(
                &[("t", t), ("x", x), ("v", v)],
                (num - oracle(t, x, v)).abs(),
            );
        }
    }
    worst.finish("conjugate_oracle", 1e-2)
}

/// The three conditions side by side; they should agree.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub hlc: CheckReport,
    pub llc: CheckReport,
    pub mlc: CheckReport,
    pub consistent: bool,
}

pub fn check_equivalence(
    spec: &HamiltonianSpec,
    r_ball: f64,
    plan: &SamplePlan,
    policy: &GridPolicy,
) -> EquivalenceReport {
    let hlc = check_hlc(spec, r_ball, plan);
    let llc = check_llc(spec, r_ball, plan, policy);
    let mlc = check_mlc(spec, r_ball, plan, policy);
    let consistent = hlc.pass == llc.pass && llc.pass == mlc.pass;
    EquivalenceReport {
        hlc,
        llc,
        mlc,
        consistent,
    }
}

/// Triple on `A = [-1, 1]` representing `H = |p|` for any nonnegative
/// `h`, `k`: `f = a (1 + |a| h(x)) / (1 + h(x))`, `l = (1 - |a|) k(x)`.
pub fn family_p_abs(h: Fn1, k: Fn1) -> FnTriple {
    FnTriple::new(
        "p_abs_family",
        ControlSet::Interval { lo: -1.0, hi: 1.0 },
        Arc::new(move |_, x, a: &[f64]| {
            let (a, hx) = (a[0], h(x));
            (
                a * (1.0 + a.abs() * hx) / (1.0 + hx),
                (1.0 - a.abs()) * k(x),
            )
        }),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct ZooEntry {
    pub name: &'static str,
    pub growth_bound: bool,
    pub hlc: bool,
    pub closed_form_l: bool,
    pub lambda_bound: bool,
}

pub fn list() -> Vec<ZooEntry> {
    BUILTIN_NAMES
        .iter()
        .map(|&name| {
            let s = builtin(name).expect("listed names exist");
            ZooEntry {
                name,
                growth_bound: s.flags.growth,
                hlc: s.flags.hlc,
                closed_form_l: s.oracle_l.is_some(),
                lambda_bound: s.lambda_bound.is_some(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::Representation;
    use approx::assert_abs_diff_eq;

    fn oracle_policy() -> GridPolicy {
        GridPolicy {
            source: LagrangianSource::Oracle,
            ..Default::default()
        }
    }

    #[test]
    fn oracle_values() {
        let l = builtin("ex_2_1").unwrap().oracle_l.unwrap();
        assert_eq!(l(0.0, 1.0, 0.5), 0.5);
        let l = builtin("ex_2_2").unwrap().oracle_l.unwrap();
        assert_eq!(l(0.0, 0.0, 0.0), -1.0);
        let d = builtin("ex_2_3").unwrap().oracle_dom.unwrap()(0.0, 0.7);
        assert_eq!(
            (d.lo, d.hi, d.lo_closed, d.hi_closed),
            (0.0, 1.0, false, true)
        );
        assert!(matches!(builtin("nope"), Err(ZooError::UnknownName(_))));
        assert_eq!(builtin("ex_2_6").unwrap().name, "ex_3_4");
    }

    #[test]
    fn hlc_true_and_halved() {
        let plan = SamplePlan::default();
        assert!(check_hlc(&builtin("ex_2_1").unwrap(), 2.0, &plan).pass);
        assert!(check_hlc(&builtin("ex_2_2").unwrap(), 2.0, &plan).pass);
        assert!(!check_hlc(&builtin("ex_2_1").unwrap().with_halved_k(), 2.0, &plan).pass);
        for name in BUILTIN_NAMES {
            assert!(
                check_hlc(&builtin(name).unwrap(), 2.0, &plan).pass,
                "{name}"
            );
        }
    }

    #[test]
    fn llc_and_mlc_agree_on_builtins() {
        let plan = SamplePlan {
            triples: 16,
            ..Default::default()
        };
        for name in BUILTIN_NAMES {
            let r = check_equivalence(&builtin(name).unwrap(), 2.0, &plan, &oracle_policy());
            assert!(r.hlc.pass && r.llc.pass && r.mlc.pass, "{name}: {r:?}");
        }
    }

    #[test]
    fn llc_example_point() {
        // x = 1, y = 0.5, v = 1: u = 0.5 at the window edge
        let s = builtin("ex_2_1").unwrap();
        let l = s.oracle_l.clone().unwrap();
        let best = convex_min(&|u| l(0.0, 0.5, u), 0.5, 0.5);
        assert_eq!(best, 1.0);
    }

    #[test]
    fn epigraph_hausdorff_bound() {
        let plan = SamplePlan {
            triples: 16,
            ..Default::default()
        };
        for name in ["ex_2_1", "ex_2_2", "ex_2_3", "ex_2_4", "ex_3_4", "p_abs"] {
            let r = check_epigraph_hausdorff(&builtin(name).unwrap(), 2.0, &plan, &oracle_policy());
            assert!(r.pass, "{name}: {r:?}");
        }
    }

    #[test]
    fn discontinuity_of_ex_2_1_at_origin() {
        // the kink of H(0.01, .) sits at p = 100; widen the window past it
        let s = builtin("ex_2_1").unwrap();
        let pg = UniformGrid::new(-200.0, 200.0, 40001).unwrap();
        let h = s.h_slice(0.0, 0.01, pg);
        let l = crate::fenchel::conjugate_windowed_at(&h, 0.01).unwrap();
        assert_abs_diff_eq!(l, 1.0, epsilon = 2e-2);
        assert_eq!(s.oracle_l.unwrap()(0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn numeric_domain_within_growth_bound() {
        let policy = GridPolicy::default();
        for name in ["ex_2_1", "ex_2_2", "ex_2_3", "ex_2_4", "ex_3_4", "p_abs"] {
            let s = builtin(name).unwrap();
            for &x in &[-1.5, -0.3, 0.0, 0.8] {
                let t = 0.5;
                let d = crate::fenchel::effective_domain(&s.l_slice(t, x, &policy));
                let b = s.c(t).unwrap() * (1.0 + f64::abs(x)) + policy.v_step;
                assert!(d.lo >= -b && d.hi <= b, "{name} x={x}: {d:?}");
            }
        }
    }

    #[test]
    fn p_abs_family_reconstructs() {
        let tr = family_p_abs(Arc::new(|x| x * x), Arc::new(|_| 1.0));
        assert_eq!(tr.eval(0.0, 0.7, &[1.0]).unwrap().0, 1.0);
        assert_eq!(tr.eval(0.0, 0.7, &[-1.0]).unwrap().0, -1.0);
        for p in [-2.0, 0.0, 3.0] {
            let best = (0..=2000)
                .map(|i| {
                    let a = -1.0 + i as f64 / 1000.0;
                    let (f, l) = tr.eval(0.0, 0.7, &[a]).unwrap();
                    p * f - l
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert_abs_diff_eq!(best, f64::abs(p), epsilon = 1e-3);
        }
    }

    #[test]
    fn external_matches_builtin() {
        let ext = external(
            "ex23_text",
            &[
                PieceSource {
                    when: Some("p >= -1".into()),
                    expr: "p - 1 - abs(x)".into(),
                },
                PieceSource {
                    when: None,
                    expr: "-2*sqrt(-p) - abs(x)".into(),
                },
            ],
            &ModulusSource {
                c: Some("1".into()),
                k: "0".into(),
                w: "r".into(),
            },
            (0.0, 1.0),
        )
        .unwrap();
        let b = builtin("ex_2_3").unwrap();
        for p in [-7.0, -1.0, 0.3, 4.0] {
            assert_eq!(ext.h(0.2, -0.4, p), b.h(0.2, -0.4, p));
        }
        assert!(check_hlc(&ext, 2.0, &SamplePlan::default()).pass);
    }
}
