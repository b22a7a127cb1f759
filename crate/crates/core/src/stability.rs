//! Perturbation experiments: `H_i -> H` should give `E_{L_i} -> E_L` and
//! `e_i -> e` uniformly on the sampled window.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::builder::{build_compact, build_noncompact, RepresentationTriple, Window};
use crate::convex_geom::{random_polygon, Polygon, Vec2};
use crate::error::{BuildError, StabilityError};
use crate::fenchel::build_epigraph;
use crate::report::{par_map, ser_f64, SamplePlan};
use crate::zoo::{Fn2, Fn3, GridPolicy, HamiltonianSpec};

pub type PerturbFn = Arc<dyn Fn(u32, f64, f64, f64) -> f64 + Send + Sync>;
pub type IndexedFn2 = Arc<dyn Fn(u32, f64, f64) -> f64 + Send + Sync>;

pub const DEFAULT_INDICES: [u32; 3] = [4, 16, 64];
pub const DECAY_RATIO: f64 = 0.3;

/// `H_i = base + perturb(i, .)`.
#[derive(Clone)]
pub struct PerturbationFamily {
    pub name: String,
    pub base: HamiltonianSpec,
    pub perturb: PerturbFn,
    pub indices: Vec<u32>,
    /// `lambda_i` for compact builds; `lambda` of the limit is `index = 0`.
    pub lambda: Option<IndexedFn2>,
}

impl std::fmt::Debug for PerturbationFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PerturbationFamily")
            .field("name", &self.name)
            .field("indices", &self.indices)
            .finish()
    }
}

impl PerturbationFamily {
    pub fn new(name: &str, base: HamiltonianSpec, perturb: PerturbFn) -> Self {
        PerturbationFamily {
            name: name.into(),
            base,
            perturb,
            indices: DEFAULT_INDICES.to_vec(),
            lambda: None,
        }
    }

    pub fn zero(base: HamiltonianSpec) -> Self {
        Self::new("zero", base, Arc::new(|_, _, _, _| 0.0))
    }

    pub fn with_lambda(mut self, lambda: IndexedFn2) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn member(&self, i: u32) -> HamiltonianSpec {
        let p = self.perturb.clone();
        let delta: Fn3 = Arc::new(move |t, x, q| p(i, t, x, q));
        self.base.plus(format!("{}[{i}]", self.base.name), delta)
    }

    /// Largest sampled midpoint-convexity defect of `p -> H_i(t,x,p)`.
    pub fn convexity_defect(&self, i: u32, window: &Window, plan: &SamplePlan) -> f64 {
        let h = self.member(i);
        let ps = crate::report::linspace(window.p_range.0, window.p_range.1, 201);
        let mut worst: f64 = 0.0;
        for (t, x, _) in plan.triples_in(window.t_range, window.x_range) {
            for w in ps.windows(3) {
                worst = worst.max(h.h(t, x, w[1]) - 0.5 * (h.h(t, x, w[0]) + h.h(t, x, w[2])));
            }
        }
        worst
    }

    /// Indices whose member fails the sampled convexity probe.
    pub fn nonconvex_indices(&self, window: &Window, plan: &SamplePlan) -> Vec<u32> {
        self.indices
            .iter()
            .copied()
            .filter(|&i| self.convexity_defect(i, window, plan) > 1e-9)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityRow {
    pub i: u32,
    #[serde(serialize_with = "ser_f64")]
    pub sup_e_err: f64,
    #[serde(serialize_with = "ser_f64")]
    pub sup_f_err: f64,
    #[serde(serialize_with = "ser_f64")]
    pub sup_l_err: f64,
    #[serde(serialize_with = "ser_f64")]
    pub sup_hausdorff_el: f64,
    /// worst `|e_i - e| - 5(n+1)[H(E_{L_i}, E_L) + |M_i - M||a|]`
    #[serde(serialize_with = "ser_f64")]
    pub bound_margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub family: String,
    pub window: Window,
    pub rows: Vec<StabilityRow>,
    pub warnings: Vec<String>,
}

impl StabilityReport {
    /// Last-index error at most `ratio` times the first.
    pub fn decays(&self, ratio: f64) -> bool {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => b.sup_e_err <= ratio * a.sup_e_err,
            _ => false,
        }
    }

    pub fn bound_holds(&self, slack: f64) -> bool {
        self.rows.iter().all(|r| r.bound_margin <= slack)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,sup_e_err,sup_f_err,sup_l_err,sup_hausdorff_EL\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.i, r.sup_e_err, r.sup_f_err, r.sup_l_err, r.sup_hausdorff_el
            )
            .expect("write to string");
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuilderKind {
    Noncompact,
    Compact,
}

impl BuilderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BuilderKind::Noncompact => "noncompact",
            BuilderKind::Compact => "compact",
        }
    }
}

fn build(
    spec: &HamiltonianSpec,
    kind: BuilderKind,
    lambda: Option<Fn2>,
    policy: &GridPolicy,
) -> Result<RepresentationTriple, BuildError> {
    match kind {
        BuilderKind::Noncompact => build_noncompact(spec, policy),
        BuilderKind::Compact => {
            let lam = lambda.ok_or_else(|| {
                BuildError::HypothesisViolation("compact build needs lambda".into())
            })?;
            build_compact(spec, lam, policy)
        }
    }
}

fn indexed_lambda(family: &PerturbationFamily, i: u32) -> Option<Fn2> {
    family
        .lambda
        .clone()
        .map(|l| Arc::new(move |t, x| l(i, t, x)) as Fn2)
}

/// Sample points `(t, x, a)` of the window: `a` uniform in `[-3,3]^2` or in
/// the unit disc.
fn window_points(window: &Window, plan: &SamplePlan, kind: BuilderKind) -> Vec<(f64, f64, Vec2)> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed.wrapping_add(17));
    let states = plan.triples_in(window.t_range, window.x_range);
    let per_state = 8;
    let mut out = Vec::new();
    for (t, x, _) in states {
        for _ in 0..per_state {
            let a = loop {
                let a = Vec2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
                match kind {
                    BuilderKind::Noncompact => break a * 3.0,
                    BuilderKind::Compact if a.norm() <= 1.0 => break a,
                    _ => {}
                }
            };
            out.push((t, x, a));
        }
    }
    out
}

/// Hausdorff distance of `E_L` slices truncated at a common cap.
fn slice_hausdorff(
    a: &RepresentationTriple,
    b: &RepresentationTriple,
    t: f64,
    x: f64,
    cap: f64,
) -> Result<f64, BuildError> {
    let (sa, sb) = (a.slice(t, x)?, b.slice(t, x)?);
    let cap = cap
        .max(sa.l.min_finite() + 3.0)
        .max(sb.l.min_finite() + 3.0);
    let ea = build_epigraph(&sa.l, cap)?.body;
    let eb = build_epigraph(&sb.l, cap)?.body;
    Ok(ea.hausdorff(&eb))
}

/// Builds the limit and one triple per index on identical grids and
/// measures sup errors of `e`, `f`, `l` over the window sample.
pub fn representation_convergence(
    family: &PerturbationFamily,
    kind: BuilderKind,
    window: &Window,
    plan: &SamplePlan,
    policy: &GridPolicy,
) -> Result<StabilityReport, StabilityError> {
    let mut warnings = Vec::new();
    let bad = family.nonconvex_indices(window, plan);
    if !bad.is_empty() {
        warnings.push(format!(
            "H_i not convex in p for i in {bad:?}; the transform convexifies them"
        ));
    }
    let limit = build(&family.base, kind, indexed_lambda(family, 0), policy)?;
    let points = window_points(window, plan, kind);
    let n1 = (family.base.n + 1) as f64;
    let rows = par_map(
        &family.indices,
        |&i| -> Result<StabilityRow, StabilityError> {
            let spec = family.member(i);
            let tri = build(&spec, kind, indexed_lambda(family, i), policy).map_err(|e| {
                StabilityError::HypothesisViolation {
                    index: i,
                    reason: e.to_string(),
                }
            })?;
            let mut row = StabilityRow {
                i,
                sup_e_err: 0.0,
                sup_f_err: 0.0,
                sup_l_err: 0.0,
                sup_hausdorff_el: 0.0,
                bound_margin: f64::NEG_INFINITY,
            };
            let mut last_state = None;
            let mut haus = 0.0;
            for &(t, x, a) in &points {
                let wrap = |e: BuildError| StabilityError::HypothesisViolation {
                    index: i,
                    reason: e.to_string(),
                };
                let (s0, si) = (
                    limit.slice(t, x).map_err(wrap)?,
                    tri.slice(t, x).map_err(wrap)?,
                );
                if last_state != Some((t, x)) {
                    let cap = (s0.m.max(si.m) * a.norm().max(3.0))
                        + s0.l.min_finite().max(si.l.min_finite())
                        + 10.0;
                    haus = slice_hausdorff(&limit, &tri, t, x, cap).map_err(wrap)?;
                    row.sup_hausdorff_el = row.sup_hausdorff_el.max(haus);
                    last_state = Some((t, x));
                }
                let e0 = s0.e(a).map_err(wrap)?;
                let ei = si.e(a).map_err(wrap)?;
                let d = ei - e0;
                row.sup_e_err = row.sup_e_err.max(d.norm());
                row.sup_f_err = row.sup_f_err.max(d.x.abs());
                row.sup_l_err = row.sup_l_err.max(d.y.abs());
                let bound = 5.0 * n1 * (haus + (si.m - s0.m).abs() * a.norm());
                row.bound_margin = row.bound_margin.max(d.norm() - bound);
            }
            Ok(row)
        },
    );
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(StabilityReport {
        family: family.name.clone(),
        window: *window,
        rows,
        warnings,
    })
}

/// `representation_convergence` with `t` frozen.
pub fn fixed_t_convergence(
    family: &PerturbationFamily,
    t: f64,
    kind: BuilderKind,
    window: &Window,
    plan: &SamplePlan,
    policy: &GridPolicy,
) -> Result<StabilityReport, StabilityError> {
    let w = Window {
        t_range: (t, t),
        ..*window
    };
    representation_convergence(family, kind, &w, plan, policy)
}

#[derive(Clone, Debug, Serialize)]
pub struct EpigraphLimitReport {
    pub family: String,
    /// worst `|d(y, E_{L_i}(t_i,x_i)) - d(y, E_L(t,x))|` per index
    pub errors: Vec<(u32, f64)>,
    pub pass: bool,
    pub warnings: Vec<String>,
}

/// Distance-function test of `E_{L_i}(t_i, x_i) -> E_L(t, x)` along
/// `t_i = t + approach/i`, `x_i = x + approach/i`. With `approach = 0`
/// the sequence sits at the limit point.
pub fn epigraph_limit_check(
    family: &PerturbationFamily,
    window: &Window,
    plan: &SamplePlan,
    approach: f64,
    policy: &GridPolicy,
) -> EpigraphLimitReport {
    let mut warnings = Vec::new();
    let bad = family.nonconvex_indices(window, plan);
    if !bad.is_empty() {
        warnings.push(format!(
            "H_i not convex in p for i in {bad:?}; the transform convexifies them"
        ));
    }
    let base_states = plan.triples_in(window.t_range, window.x_range);
    let states: Vec<(f64, f64)> = base_states
        .iter()
        .take(8)
        .map(|&(t, x, _)| (t, x))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed.wrapping_add(29));
    let probes: Vec<Vec2> = (0..16)
        .map(|_| Vec2::new(rng.random_range(-2.0..=2.0), rng.random_range(-3.0..=2.0)))
        .collect();
    let errors: Vec<(u32, f64)> = par_map(&family.indices, |&i| {
        let hi = family.member(i);
        let mut worst: f64 = 0.0;
        for &(t, x) in &states {
            let ti = (t + approach / i as f64).min(window.t_range.1.max(t));
            let xi = x + approach / i as f64;
            let l0 = family.base.l_slice(t, x, policy);
            let li = hi.l_slice(ti, xi, policy);
            let cap = l0.min_finite().max(li.min_finite()) + 12.0;
            let e0 = build_epigraph(&l0, cap).expect("cap above minimum").body;
            let ei = build_epigraph(&li, cap).expect("cap above minimum").body;
            let floor = l0.min_finite();
            for y in &probes {
                let y = Vec2::new(y.x, y.y + floor);
                worst = worst.max((ei.distance(y) - e0.distance(y)).abs());
            }
        }
        (i, worst)
    });
    let first = errors.first().map_or(0.0, |e| e.1);
    let last = errors.last().map_or(0.0, |e| e.1);
    let tol = 2.0 * policy.v_step;
    let pass = last <= 0.05 && (last <= DECAY_RATIO * first || last <= tol);
    EpigraphLimitReport {
        family: family.name.clone(),
        errors,
        pass,
        warnings,
    }
}

/// Sup over the window of `H(E_{L_i}, E_L)` per index.
pub fn hausdorff_decay(
    family: &PerturbationFamily,
    window: &Window,
    plan: &SamplePlan,
    policy: &GridPolicy,
) -> Vec<(u32, f64)> {
    let states: Vec<(f64, f64)> = plan
        .triples_in(window.t_range, window.x_range)
        .iter()
        .map(|&(t, x, _)| (t, x))
        .collect();
    par_map(&family.indices, |&i| {
        let hi = family.member(i);
        let worst = states
            .iter()
            .map(|&(t, x)| {
                let l0 = family.base.l_slice(t, x, policy);
                let li = hi.l_slice(t, x, policy);
                let cap = l0.min_finite().max(li.min_finite()) + 3.0;
                let e0 = build_epigraph(&l0, cap).expect("cap").body;
                let ei = build_epigraph(&li, cap).expect("cap").body;
                e0.hausdorff(&ei)
            })
            .fold(0.0, f64::max);
        (i, worst)
    })
}

/// `K_i -> K`, `D_i -> D` with `K` meeting the interior of `D`: returns,
/// per seeded pair, the Hausdorff errors of `K_i cap D_i` against `K cap D`
/// at each index.
pub fn intersection_limit_check(seed: u64, pairs: usize, indices: &[u32]) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < pairs {
        let k = random_polygon(&mut rng, Vec2::zeros(), 1.0, 8);
        let c = Vec2::new(rng.random_range(-0.3..=0.3), rng.random_range(-0.3..=0.3));
        let d = random_polygon(&mut rng, c, 1.0, 8);
        // K must meet the interior of D: demand a robust overlap
        let Ok(Some(kd)) = k.intersect(&d) else {
            continue;
        };
        if kd.len() < 3 || area(&kd) < 0.05 {
            continue;
        }
        let shift = Vec2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        let errs = indices
            .iter()
            .map(|&i| {
                let s = 1.0 / i as f64;
                let ki = scale_about(&k, 1.0 + s, Vec2::zeros());
                let di = translate(&d, shift * s);
                match ki.intersect(&di) {
                    Ok(Some(p)) => p.hausdorff(&kd),
                    _ => f64::INFINITY,
                }
            })
            .collect();
        out.push(errs);
    }
    out
}

fn area(p: &Polygon) -> f64 {
    let v = p.vertices();
    (0..v.len())
        .map(|i| v[i].perp(&v[(i + 1) % v.len()]))
        .sum::<f64>()
        * 0.5
}

fn scale_about(p: &Polygon, s: f64, c: Vec2) -> Polygon {
    Polygon::hull(
        &p.vertices()
            .iter()
            .map(|v| c + (v - c) * s)
            .collect::<Vec<_>>(),
    )
    .expect("nonempty")
}

fn translate(p: &Polygon, d: Vec2) -> Polygon {
    Polygon::hull(&p.vertices().iter().map(|v| v + d).collect::<Vec<_>>()).expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::builtin;

    fn small_plan() -> SamplePlan {
        SamplePlan {
            triples: 6,
            ..Default::default()
        }
    }

    #[test]
    fn zero_perturbation_is_exact() {
        let fam = PerturbationFamily::zero(builtin("ex_2_1").unwrap());
        let r = representation_convergence(
            &fam,
            BuilderKind::Noncompact,
            &Window::default(),
            &small_plan(),
            &GridPolicy::default(),
        )
        .unwrap();
        assert!(r
            .rows
            .iter()
            .all(|row| row.sup_e_err == 0.0 && row.sup_hausdorff_el == 0.0));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn constant_shift_decays() {
        let fam = PerturbationFamily::new(
            "sin_x",
            builtin("ex_2_1").unwrap(),
            Arc::new(|i, _, x, _| x.sin() / i as f64),
        );
        let r = representation_convergence(
            &fam,
            BuilderKind::Noncompact,
            &Window::default(),
            &small_plan(),
            &GridPolicy::default(),
        )
        .unwrap();
        assert!(r.decays(DECAY_RATIO), "{r:?}");
        assert!(r.bound_holds(5e-3), "{r:?}");
        assert!(r
            .to_csv()
            .starts_with("i,sup_e_err,sup_f_err,sup_l_err,sup_hausdorff_EL\n4,"));
    }

    #[test]
    fn cosine_family_is_flagged() {
        let fam = PerturbationFamily::new(
            "cos",
            builtin("ex_2_2").unwrap(),
            Arc::new(|i, _, _, p| p.cos() / i as f64),
        );
        let w = Window {
            p_range: (-10.0, 10.0),
            ..Default::default()
        };
        assert!(!fam.nonconvex_indices(&w, &small_plan()).is_empty());
        assert_eq!(
            PerturbationFamily::zero(builtin("ex_2_2").unwrap()).convexity_defect(
                4,
                &w,
                &small_plan()
            ),
            0.0
        );
    }

    #[test]
    fn intersections_converge() {
        for errs in intersection_limit_check(3, 10, &DEFAULT_INDICES) {
            assert!(errs[2] <= DECAY_RATIO * errs[0] + 1e-9, "{errs:?}");
        }
    }
}
