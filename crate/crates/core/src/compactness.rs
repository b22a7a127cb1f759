//! Necessary condition for compact controls: if `(A, f, l)` represents `H`
//! with `A` compact then `L(t,x,f(t,x,a)) <= l(t,x,a)`, `f(t,x,A)` fills
//! `dom L` once convexified, and `lambda = sup l` bounds `L` on its domain.

use std::sync::Arc;

use serde::Serialize;

use crate::builder::{ControlSet, FnTriple, Representation, SIMPLEX_DENOM};
use crate::error::{BuildError, CompactnessError};
use crate::fenchel::{
    conjugate_windowed, effective_domain, ConvexGridFunction, EffectiveDomain, UniformGrid,
};
use crate::report::{
    linspace, par_map, ser_f64, CheckReport, Witness, WorstTracker, SCHEMA_VERSION,
};
use crate::zoo::{Fn3, GridPolicy, HamiltonianSpec, LagrangianSource, LagrangianView};

/// `f = a1 |x|`, `l = |a1| + |a2| (1 - |a1|)` on `[-1, 1]^2`; represents
/// `max(|p||x| - 1, 0)`.
pub fn hat_ex_2_1() -> FnTriple {
    FnTriple::new(
        "hat_ex_2_1",
        ControlSet::Cube {
            dim: 2,
            lo: -1.0,
            hi: 1.0,
        },
        Arc::new(|_, x, a: &[f64]| (a[0] * x.abs(), a[0].abs() + a[1].abs() * (1.0 - a[0].abs()))),
    )
}

/// `f = a1`, `l = a2 + |x|` on the unit circle; represents `sqrt(1+p^2) - |x|`.
pub fn circle_ex_2_2() -> FnTriple {
    FnTriple::new(
        "circle_ex_2_2",
        ControlSet::UnitCircle,
        Arc::new(|_, x, a: &[f64]| (a[0], a[1] + x.abs())),
    )
}

/// Where `L` comes from when testing a triple.
#[derive(Clone)]
pub enum LSource {
    Oracle(Fn3),
    /// windowed transform of `p -> max_a { p f - l }` over the sample
    Induced,
}

/// Sampled `(f, l)` pairs of a triple at one state.
fn sampled_pairs(
    rep: &dyn Representation,
    t: f64,
    x: f64,
    controls: &[Vec<f64>],
) -> Result<Vec<(f64, f64)>, BuildError> {
    controls.iter().map(|a| rep.eval(t, x, a)).collect()
}

fn grid_of(rep: &dyn Representation, res: usize) -> Result<Vec<Vec<f64>>, CompactnessError> {
    rep.control()
        .grid(res)
        .ok_or(CompactnessError::NoncompactControl)
}

/// `L(t, x, .)` on a grid covering the sampled image.
fn l_for(
    pairs: &[(f64, f64)],
    source: &LSource,
    t: f64,
    x: f64,
    policy: &GridPolicy,
) -> ConvexGridFunction {
    let reach = pairs.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let vg = UniformGrid::symmetric(reach + 1.0, policy.v_step).expect("positive width");
    match source {
        LSource::Oracle(l) => {
            ConvexGridFunction::sample(vg, |v| l(t, x, v)).expect("proper oracle")
        }
        LSource::Induced => {
            let h = ConvexGridFunction::sample(policy.p_grid, |p| {
                pairs
                    .iter()
                    .map(|&(f, l)| p * f - l)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .expect("finite induced H");
            conjugate_windowed(&h, vg).expect("proper induced L")
        }
    }
}

fn l_at(l: &ConvexGridFunction, source: &LSource, t: f64, x: f64, v: f64) -> f64 {
    match source {
        LSource::Oracle(f) => f(t, x, v),
        LSource::Induced => l.value_at(v),
    }
}

/// Worst `L(t,x,f(t,x,a)) - l(t,x,a)` over sampled states and controls.
pub fn lemma41_check(
    rep: &dyn Representation,
    source: &LSource,
    states: &[(f64, f64)],
    res: usize,
    policy: &GridPolicy,
) -> Result<CheckReport, CompactnessError> {
    let controls = grid_of(rep, res)?;
    let per = par_map(states, |&(t, x)| -> Result<WorstTracker, BuildError> {
        let pairs = sampled_pairs(rep, t, x, &controls)?;
        let l = l_for(&pairs, source, t, x, policy);
        let mut w = WorstTracker::new(3);
        for (a, &(f, lv)) in controls.iter().zip(&pairs) {
            let mut at = vec![("t", t), ("x", x), ("f", f)];
            at.extend(
                a.iter()
                    .take(2)
                    .enumerate()
                    .map(|(i, &ai)| (["a1", "a2"][i], ai)),
            );
            w.push(&at, l_at(&l, source, t, x, f) - lv);
        }
        Ok(w)
    });
    let mut all = WorstTracker::new(3);
    for w in per {
        all.merge(w.map_err(|_| CompactnessError::NoncompactControl)?);
    }
    Ok(all.finish("lemma41", 2e-2))
}

/// Closure of the sampled `f`-image against the closure of `dom L` of the
/// induced Hamiltonian.
pub fn lemma42_check(
    rep: &dyn Representation,
    states: &[(f64, f64)],
    res: usize,
    policy: &GridPolicy,
) -> Result<CheckReport, CompactnessError> {
    let controls = grid_of(rep, res)?;
    let mut w = WorstTracker::new(3);
    for &(t, x) in states {
        let pairs =
            sampled_pairs(rep, t, x, &controls).map_err(|_| CompactnessError::NoncompactControl)?;
        let lo = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = pairs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let dom = effective_domain(&l_for(&pairs, &LSource::Induced, t, x, policy));
        w.push(
            &[("t", t), ("x", x)],
            EffectiveDomain::closed(lo, hi).closure_gap(&dom),
        );
    }
    Ok(w.finish("lemma42", 0.05))
}

/// `(A^(n+1) x simplex, sum alpha_i f(a_i), sum alpha_i l(a_i))`.
pub struct ConvexifiedTriple {
    base: Arc<dyn Representation>,
    control: ControlSet,
    name: String,
    atoms: usize,
    base_dim: usize,
}

impl std::fmt::Debug for ConvexifiedTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvexifiedTriple")
            .field("name", &self.name)
            .field("atoms", &self.atoms)
            .finish()
    }
}

pub fn convexify(base: Arc<dyn Representation>) -> Result<ConvexifiedTriple, CompactnessError> {
    if !base.control().is_compact() {
        return Err(CompactnessError::NoncompactControl);
    }
    // scalar state: n + 1 = 2 atoms
    let atoms = 2;
    let base_dim = base.control().dim();
    Ok(ConvexifiedTriple {
        control: ControlSet::Convexified {
            base: Box::new(base.control().clone()),
            atoms,
        },
        name: format!("conv({})", base.name()),
        base,
        atoms,
        base_dim,
    })
}

impl ConvexifiedTriple {
    pub fn base(&self) -> &Arc<dyn Representation> {
        &self.base
    }
}

impl Representation for ConvexifiedTriple {
    fn name(&self) -> &str {
        &self.name
    }
    fn control(&self) -> &ControlSet {
        &self.control
    }
    fn eval(&self, t: f64, x: f64, a: &[f64]) -> Result<(f64, f64), BuildError> {
        let (atoms, alpha) = a.split_at(self.atoms * self.base_dim);
        let mut acc = (0.0, 0.0);
        for (chunk, &w) in atoms.chunks(self.base_dim).zip(alpha) {
            if w != 0.0 {
                let (f, l) = self.base.eval(t, x, chunk)?;
                acc.0 += w * f;
                acc.1 += w * l;
            }
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaRow {
    pub t: f64,
    pub x: f64,
    pub lambda: f64,
    #[serde(serialize_with = "ser_f64")]
    pub sup_l: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaReport {
    pub rows: Vec<LambdaRow>,
    pub blc: CheckReport,
    /// largest sampled `|lambda(x) - lambda(y)| / |x - y|` at equal `t`
    pub lipschitz_estimate: f64,
}

impl LambdaReport {
    pub fn lambda_at(&self, t: f64, x: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.t == t && r.x == x)
            .map(|r| r.lambda)
    }
}

/// `lambda(t,x) = max` of sampled `l` over the convexified controls, and the
/// sampled check `L <= lambda + 2e-2` on `dom L`.
pub fn extract_lambda(
    ct: &ConvexifiedTriple,
    source: &LSource,
    states: &[(f64, f64)],
    res: usize,
    policy: &GridPolicy,
) -> Result<LambdaReport, CompactnessError> {
    let controls = grid_of(ct, res)?;
    let base_controls = grid_of(ct.base.as_ref(), res)?;
    let per = par_map(
        states,
        |&(t, x)| -> Result<(LambdaRow, WorstTracker), BuildError> {
            let pairs = sampled_pairs(ct, t, x, &controls)?;
            let lambda = pairs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            let base_pairs = sampled_pairs(ct.base.as_ref(), t, x, &base_controls)?;
            let l = l_for(&base_pairs, source, t, x, policy);
            let g = l.grid();
            let mut w = WorstTracker::new(3);
            let mut sup_l = f64::NEG_INFINITY;
            for v in g.nodes() {
                let lv = l_at(&l, source, t, x, v);
                if lv.is_finite() {
                    sup_l = sup_l.max(lv);
                    w.push(&[("t", t), ("x", x), ("v", v)], lv - lambda);
                }
            }
            Ok((
                LambdaRow {
                    t,
                    x,
                    lambda,
                    sup_l,
                },
                w,
            ))
        },
    );
    let mut rows = Vec::new();
    let mut all = WorstTracker::new(3);
    for r in per {
        let (row, w) = r.map_err(|_| CompactnessError::NoncompactControl)?;
        rows.push(row);
        all.merge(w);
    }
    let mut lip: f64 = 0.0;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            if a.t == b.t && a.x != b.x {
                lip = lip.max((a.lambda - b.lambda).abs() / (a.x - b.x).abs());
            }
        }
    }
    Ok(LambdaReport {
        rows,
        blc: all.finish("blc_certificate", 2e-2),
        lipschitz_estimate: lip,
    })
}

pub const BLC_MARGINS: [f64; 3] = [1e-1, 1e-2, 1e-3];
pub const BLC_THRESHOLD: f64 = 1e3;
pub const VERDICT_VIOLATED: &str = "BLC violated (diverging interior sup)";
pub const VERDICT_BOUNDED: &str = "bounded, candidate lambda found";

#[derive(Clone, Debug, Serialize)]
pub struct BlcRow {
    pub t: f64,
    pub x: f64,
    /// interior sup per margin
    #[serde(serialize_with = "ser_vec")]
    pub sups: Vec<f64>,
    pub diverging: bool,
    /// sup over the closed part of the domain when bounded
    #[serde(serialize_with = "ser_opt")]
    pub lambda: Option<f64>,
}

fn ser_vec<S: serde::Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct F(f64);
    impl Serialize for F {
        fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            ser_f64(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for &x in v {
        seq.serialize_element(&F(x))?;
    }
    seq.end()
}

fn ser_opt<S: serde::Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_f64(x, s),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlcReport {
    pub schema: u32,
    pub check: String,
    pub hamiltonian: String,
    #[serde(serialize_with = "ser_f64")]
    pub worst_margin: f64,
    pub verdict: String,
    pub violated: bool,
    pub witnesses: Vec<Witness>,
    pub rows: Vec<BlcRow>,
}

/// Sups of `L` over `dom L` shrunk by each margin. A slice diverges when
/// the sup at the finest margin reaches the threshold or the increments
/// grow at least fivefold per decade (a pole `1/delta` grows tenfold; a
/// bounded function's increments shrink).
pub fn detect_blc_failure(
    spec: &HamiltonianSpec,
    states: &[(f64, f64)],
    margins: &[f64],
    policy: &GridPolicy,
) -> BlcReport {
    let policy = GridPolicy {
        source: LagrangianSource::Oracle,
        ..*policy
    };
    let rows: Vec<BlcRow> = par_map(states, |&(t, x)| {
        let view = LagrangianView::of(spec, t, x, &policy);
        let dom = view.dom();
        let sups: Vec<f64> = margins
            .iter()
            .map(|&d| {
                let (lo, hi) = if dom.hi - dom.lo > 2.0 * d {
                    (dom.lo + d, dom.hi - d)
                } else {
                    (dom.lo, dom.lo)
                };
                linspace(lo, hi, 2001)
                    .into_iter()
                    .map(|v| view.eval(v))
                    .filter(|v| v.is_finite())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let last = *sups.last().unwrap_or(&f64::NEG_INFINITY);
        let growing = sups.windows(3).any(|w| {
            let (d1, d2) = (w[1] - w[0], w[2] - w[1]);
            d1 > 0.0 && d2 >= 5.0 * d1
        });
        let diverging = last >= BLC_THRESHOLD || growing;
        let lambda = (!diverging).then(|| {
            let mut s = sups.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (end, closed) in [(dom.lo, dom.lo_closed), (dom.hi, dom.hi_closed)] {
                let v = view.eval(end);
                if closed && v.is_finite() {
                    s = s.max(v);
                }
            }
            s
        });
        BlcRow {
            t,
            x,
            sups,
            diverging,
            lambda,
        }
    });
    let violated = rows.iter().any(|r| r.diverging);
    let mut w = WorstTracker::new(3);
    for r in &rows {
        w.push(
            &[("t", r.t), ("x", r.x)],
            *r.sups.last().unwrap_or(&f64::NEG_INFINITY),
        );
    }
    let worst = w.worst();
    let witnesses = w.finish("blc", BLC_THRESHOLD).witnesses;
    BlcReport {
        schema: SCHEMA_VERSION,
        check: "blc".into(),
        hamiltonian: spec.name.clone(),
        worst_margin: worst,
        verdict: if violated {
            VERDICT_VIOLATED
        } else {
            VERDICT_BOUNDED
        }
        .into(),
        violated,
        witnesses,
        rows,
    }
}

/// `|sup over base - sup over convexified|` at the given `(t, x, p)`.
pub fn reconstruction_gap(
    base: &dyn Representation,
    conv: &dyn Representation,
    points: &[(f64, f64, f64)],
    base_res: usize,
    conv_res: usize,
) -> Result<CheckReport, CompactnessError> {
    let bc = grid_of(base, base_res)?;
    let cc = grid_of(conv, conv_res)?;
    let per = par_map(points, |&(t, x, p)| -> Result<f64, BuildError> {
        let b = crate::builder::reconstruct_h(base, t, x, p, &bc)?;
        let c = crate::builder::reconstruct_h(conv, t, x, p, &cc)?;
        Ok((b - c).abs())
    });
    let mut w = WorstTracker::new(3);
    for (&(t, x, p), r) in points.iter().zip(per) {
        w.push(
            &[("t", t), ("x", x), ("p", p)],
            r.map_err(|_| CompactnessError::NoncompactControl)?,
        );
    }
    Ok(w.finish("convexified_reconstruction", 2e-2))
}

/// Hausdorff gap between the sampled image of the convexified `f` and the
/// interval hull of the sampled base image.
pub fn image_hull_gap(
    base: &dyn Representation,
    conv: &dyn Representation,
    states: &[(f64, f64)],
    base_res: usize,
    conv_res: usize,
) -> Result<CheckReport, CompactnessError> {
    let bc = grid_of(base, base_res)?;
    let cc = grid_of(conv, conv_res)?;
    let mut w = WorstTracker::new(3);
    for &(t, x) in states {
        let hull = |rep: &dyn Representation,
                    c: &[Vec<f64>]|
         -> Result<EffectiveDomain, CompactnessError> {
            let pairs =
                sampled_pairs(rep, t, x, c).map_err(|_| CompactnessError::NoncompactControl)?;
            let lo = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let hi = pairs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            Ok(EffectiveDomain::closed(lo, hi))
        };
        w.push(
            &[("t", t), ("x", x)],
            hull(base, &bc)?.closure_gap(&hull(conv, &cc)?),
        );
    }
    Ok(w.finish("convexified_image", 0.05))
}

/// Weights and atoms realizing `target` in the sampled convexified image,
/// as `(f, active atoms)`; `None` when the target lies outside the hull.
pub fn caratheodory_witness(
    base: &dyn Representation,
    t: f64,
    x: f64,
    target: f64,
    res: usize,
) -> Result<Option<(f64, usize)>, CompactnessError> {
    let bc = grid_of(base, res)?;
    let pairs = sampled_pairs(base, t, x, &bc).map_err(|_| CompactnessError::NoncompactControl)?;
    let lo = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pairs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if target < lo || target > hi {
        return Ok(None);
    }
    if hi == lo {
        return Ok(Some((lo, 1)));
    }
    let alpha = ((target - lo) / (hi - lo) * SIMPLEX_DENOM as f64).round() / SIMPLEX_DENOM as f64;
    let f = alpha * hi + (1.0 - alpha) * lo;
    let active = [alpha, 1.0 - alpha].iter().filter(|&&w| w > 0.0).count();
    Ok(Some((f, active)))
}

/// The whole chain on the stock triples: the `L <= l` inequality for the two
/// `|p|`-type triples and the hat triple, and certified bounds `lambda = 1`
/// for the hat and `lambda = 1 + |x|` for the circle.
pub fn pipeline_checks(
    states: &[(f64, f64)],
    policy: &GridPolicy,
) -> Result<Vec<CheckReport>, CompactnessError> {
    let ind: Fn3 = Arc::new(|_, _, v: f64| if v.abs() <= 1.0 { 0.0 } else { f64::INFINITY });
    let zero = crate::zoo::family_p_abs(Arc::new(|_| 0.0), Arc::new(|_| 0.0));
    let sq = crate::zoo::family_p_abs(Arc::new(|x| x * x), Arc::new(|_| 1.0));
    let named = |mut r: CheckReport, name: &str| {
        r.check = format!("{}_{name}", r.check);
        r
    };
    let mut out = vec![
        named(
            lemma41_check(&zero, &LSource::Oracle(ind), states, 41, policy)?,
            "p_abs_zero",
        ),
        named(
            lemma41_check(&sq, &LSource::Induced, states, 41, policy)?,
            "p_abs_sq",
        ),
        named(
            lemma41_check(&hat_ex_2_1(), &LSource::Induced, states, 41, policy)?,
            "hat",
        ),
    ];
    let hat = convexify(Arc::new(hat_ex_2_1()))?;
    let circle = convexify(Arc::new(circle_ex_2_2()))?;
    type Run<'a> = (&'a ConvexifiedTriple, &'a str, usize, fn(f64) -> f64);
    let runs: [Run; 2] = [
        (&hat, "hat", 9, |_| 1.0),
        (&circle, "circle", 36, |x| 1.0 + x.abs()),
    ];
    for (ct, name, res, expected) in runs {
        let r = extract_lambda(ct, &LSource::Induced, states, res, policy)?;
        let mut w = WorstTracker::new(3);
        for row in &r.rows {
            w.push(
                &[("t", row.t), ("x", row.x)],
                (row.lambda - expected(row.x)).abs(),
            );
        }
        out.push(named(r.blc, name));
        out.push(w.finish(&format!("lambda_{name}"), 2e-2));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{builtin, family_p_abs};

    fn states(xs: &[f64]) -> Vec<(f64, f64)> {
        xs.iter().map(|&x| (0.5, x)).collect()
    }

    #[test]
    fn hat_and_circle_represent_their_hamiltonians() {
        let hat = hat_ex_2_1();
        let s = builtin("ex_2_1").unwrap();
        let grid = hat.control().grid(41).unwrap();
        for (x, p) in [(0.5, 3.0), (1.0, -2.0), (0.0, 5.0)] {
            let r = crate::builder::reconstruct_h(&hat, 0.0, x, p, &grid).unwrap();
            assert!((r - s.h(0.0, x, p)).abs() < 1e-9);
        }
        let circ = circle_ex_2_2();
        let grid = circ.control().grid(180).unwrap();
        let r = crate::builder::reconstruct_h(&circ, 0.0, 0.3, 1.0, &grid).unwrap();
        assert!((r - (2f64.sqrt() - 0.3)).abs() < 1e-3);
    }

    #[test]
    fn lemma41_on_p_abs() {
        let zero = family_p_abs(Arc::new(|_| 0.0), Arc::new(|_| 0.0));
        let ind: Fn3 = Arc::new(|_, _, v: f64| if v.abs() <= 1.0 { 0.0 } else { f64::INFINITY });
        let r = lemma41_check(
            &zero,
            &LSource::Oracle(ind),
            &states(&[-1.0, 0.0, 1.0]),
            21,
            &GridPolicy::default(),
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
        let fam = family_p_abs(Arc::new(|x| x * x), Arc::new(|_| 1.0));
        let r = lemma41_check(
            &fam,
            &LSource::Induced,
            &states(&[-1.0, 0.5]),
            21,
            &GridPolicy::default(),
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn convexified_matches_base() {
        let base: Arc<dyn Representation> = Arc::new(hat_ex_2_1());
        let ct = convexify(base.clone()).unwrap();
        assert_eq!(ct.control().dim(), 6);
        let (f, l) = ct
            .eval(0.0, 0.5, &[1.0, 0.0, -1.0, 0.0, 0.25, 0.75])
            .unwrap();
        assert_eq!((f, l), (0.25 * 0.5 - 0.75 * 0.5, 1.0));
        let pts = [(0.0, 0.5, 2.0), (0.0, -1.0, -3.0), (0.0, 0.0, 1.0)];
        assert!(
            reconstruction_gap(base.as_ref(), &ct, &pts, 41, 9)
                .unwrap()
                .pass
        );
        assert!(
            image_hull_gap(base.as_ref(), &ct, &states(&[0.5, 1.0]), 41, 9)
                .unwrap()
                .pass
        );
        assert!(matches!(
            convexify(Arc::new(FnTriple::new(
                "r2",
                ControlSet::FullSpace { dim: 2 },
                Arc::new(|_, _, a: &[f64]| (a[0], a[1]))
            ))),
            Err(CompactnessError::NoncompactControl)
        ));
    }

    #[test]
    fn lambda_of_hat_is_one() {
        let ct = convexify(Arc::new(hat_ex_2_1())).unwrap();
        let r = extract_lambda(
            &ct,
            &LSource::Induced,
            &states(&[-1.0, 0.5, 1.0]),
            9,
            &GridPolicy::default(),
        )
        .unwrap();
        assert!(r.blc.pass, "{r:?}");
        assert!(r.rows.iter().all(|row| (row.lambda - 1.0).abs() < 1e-12));
        assert_eq!(r.lipschitz_estimate, 0.0);
    }

    #[test]
    fn blc_verdicts() {
        let pol = GridPolicy::default();
        let xs = states(&[0.5, 1.0]);
        assert!(detect_blc_failure(&builtin("ex_2_3").unwrap(), &xs, &BLC_MARGINS, &pol).violated);
        let r = detect_blc_failure(
            &builtin("ex_2_4").unwrap(),
            &states(&[1.0]),
            &BLC_MARGINS,
            &pol,
        );
        assert!(r.violated && r.rows[0].sups[2] < BLC_THRESHOLD);
        let r = detect_blc_failure(&builtin("ex_2_2").unwrap(), &xs, &BLC_MARGINS, &pol);
        assert_eq!(r.verdict, VERDICT_BOUNDED);
        assert!((r.rows[1].lambda.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pipeline_passes() {
        let reports = pipeline_checks(&states(&[-1.0, 0.0, 1.0]), &GridPolicy::default()).unwrap();
        assert_eq!(reports.len(), 7);
        for r in &reports {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn caratheodory_uses_two_atoms() {
        let (f, k) = caratheodory_witness(&hat_ex_2_1(), 0.0, 1.0, 0.5, 9)
            .unwrap()
            .unwrap();
        assert!((f - 0.5).abs() <= 1.0 / SIMPLEX_DENOM as f64 && k <= 2);
        assert!(caratheodory_witness(&hat_ex_2_1(), 0.0, 1.0, 2.0, 9)
            .unwrap()
            .is_none());
    }
}
