//! Legendre-Fenchel transforms of functions sampled on uniform grids, plus
//! the epigraph bodies built from them.
//!
//! `+inf` is stored as `f64::INFINITY`; anything at or above
//! [`INF_THRESHOLD`] is normalized to it on construction.

use serde::{Deserialize, Serialize};

use crate::convex_geom::{Polygon, Vec2};
use crate::error::FenchelError;
use crate::report::{CheckReport, WorstTracker};

pub const INF_THRESHOLD: f64 = 1e12;

/// A maximizer counts as escaping the window when `w` beats the edge slope by
/// more than this.
pub const ESCAPE_TOL: f64 = 1e-7;

/// Default momentum window `[-50, 50]` with 10001 nodes.
pub const P_WINDOW: f64 = 50.0;
pub const P_COUNT: usize = 10001;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl UniformGrid {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self, FenchelError> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi || count < 2 {
            return Err(FenchelError::BadGrid(format!(
                "[{lo}, {hi}] with {count} nodes"
            )));
        }
        Ok(UniformGrid { lo, hi, count })
    }

    /// Grid on `[-m h, m h]` with `m = ceil(half_width / h)`, so multiples of
    /// `h` (and 0) are nodes.
    pub fn symmetric(half_width: f64, h: f64) -> Result<Self, FenchelError> {
        let m = (half_width / h - 1e-9).ceil().max(1.0) as usize;
        let w = m as f64 * h;
        UniformGrid::new(-w, w, 2 * m + 1)
    }

    pub fn default_p() -> Self {
        UniformGrid {
            lo: -P_WINDOW,
            hi: P_WINDOW,
            count: P_COUNT,
        }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.node(i))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexGridFunction {
    grid: UniformGrid,
    values: Vec<f64>,
    convex: bool,
}

impl ConvexGridFunction {
    pub fn new(grid: UniformGrid, mut values: Vec<f64>) -> Result<Self, FenchelError> {
        if values.len() != grid.count {
            return Err(FenchelError::BadGrid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.count
            )));
        }
        for v in values.iter_mut() {
            if v.is_nan() || *v == f64::NEG_INFINITY {
                return Err(FenchelError::BadGrid("NaN or -inf value".into()));
            }
            if *v >= INF_THRESHOLD {
                *v = f64::INFINITY;
            }
        }
        let finite: Vec<usize> = (0..values.len())
            .filter(|&i| values[i].is_finite())
            .collect();
        let (Some(&a), Some(&b)) = (finite.first(), finite.last()) else {
            return Err(FenchelError::ImproperFunction);
        };
        if b - a + 1 != finite.len() {
            return Err(FenchelError::BadGrid(
                "finite nodes are not contiguous".into(),
            ));
        }
        let mut f = ConvexGridFunction {
            grid,
            values,
            convex: false,
        };
        f.convex = f.convexity_violation() <= 1e-9;
        Ok(f)
    }

    pub fn sample(grid: UniformGrid, f: impl Fn(f64) -> f64) -> Result<Self, FenchelError> {
        let values = grid.nodes().map(f).collect();
        ConvexGridFunction::new(grid, values)
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// Node indices holding finite values (contiguous by construction).
    pub fn finite_range(&self) -> (usize, usize) {
        let a = self.values.iter().position(|v| v.is_finite()).unwrap();
        let b = self.values.iter().rposition(|v| v.is_finite()).unwrap();
        (a, b)
    }

    pub fn min_finite(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest discrete midpoint violation `2 f(i) - f(i-1) - f(i+1)` over
    /// finite triples, relative to the magnitude of the values.
    pub fn convexity_violation(&self) -> f64 {
        self.values
            .windows(3)
            .filter(|w| w.iter().all(|v| v.is_finite()))
            .map(|w| (2.0 * w[1] - w[0] - w[2]) / (1.0 + w[1].abs()))
            .fold(0.0_f64, f64::max)
    }

    /// Linear interpolation; `+inf` outside the finite nodes.
    pub fn value_at(&self, v: f64) -> f64 {
        let g = &self.grid;
        let h = g.step();
        let s = (v - g.lo) / h;
        if s < -1e-9 || s > (g.count - 1) as f64 + 1e-9 {
            return f64::INFINITY;
        }
        let s = s.clamp(0.0, (g.count - 1) as f64);
        let i = (s.floor() as usize).min(g.count - 2);
        let frac = s - i as f64;
        let (a, b) = (self.values[i], self.values[i + 1]);
        if frac <= 1e-9 {
            a
        } else if frac >= 1.0 - 1e-9 {
            b
        } else if a.is_finite() && b.is_finite() {
            a + (b - a) * frac
        } else {
            f64::INFINITY
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("v,value\n");
        for (v, y) in self.grid.nodes().zip(&self.values) {
            out.push_str(&format!("{v},{y}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, FenchelError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("v,value") {
            return Err(FenchelError::Csv("missing `v,value` header".into()));
        }
        let mut vs = Vec::new();
        let mut ys = Vec::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| FenchelError::Csv(format!("line {}: expected two fields", n + 2)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| FenchelError::Csv(format!("line {}: {e}", n + 2)))
            };
            vs.push(parse(a)?);
            ys.push(parse(b)?);
        }
        if vs.len() < 2 {
            return Err(FenchelError::Csv("need at least two rows".into()));
        }
        let grid = UniformGrid::new(vs[0], vs[vs.len() - 1], vs.len())?;
        let h = grid.step();
        if vs
            .iter()
            .enumerate()
            .any(|(i, v)| (v - grid.node(i)).abs() > 1e-6 * h)
        {
            return Err(FenchelError::Csv("abscissae are not uniform".into()));
        }
        ConvexGridFunction::new(grid, ys)
    }
}

fn finite_nodes(f: &ConvexGridFunction) -> Result<Vec<(f64, f64)>, FenchelError> {
    let pts: Vec<(f64, f64)> = f
        .grid
        .nodes()
        .zip(&f.values)
        .filter(|(_, y)| y.is_finite())
        .map(|(p, &y)| (p, y))
        .collect();
    if pts.is_empty() {
        return Err(FenchelError::ImproperFunction);
    }
    Ok(pts)
}

fn sup_affine(pts: &[(f64, f64)], w: f64) -> f64 {
    pts.iter()
        .map(|&(p, y)| w * p - y)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Conjugate at a single abscissa.
pub fn conjugate_at(f: &ConvexGridFunction, w: f64) -> Result<f64, FenchelError> {
    let v = sup_affine(&finite_nodes(f)?, w);
    Ok(if v >= INF_THRESHOLD { f64::INFINITY } else { v })
}

/// `out(w) = max_p (w p - f(p))` over the finite input nodes.
pub fn conjugate(
    f: &ConvexGridFunction,
    out: UniformGrid,
) -> Result<ConvexGridFunction, FenchelError> {
    let pts = finite_nodes(f)?;
    let values = out.nodes().map(|w| sup_affine(&pts, w)).collect();
    ConvexGridFunction::new(out, values)
}

/// Slopes of `f` at the two ends of the grid, when `f` is finite there.
fn edge_slopes(f: &ConvexGridFunction) -> (Option<f64>, Option<f64>) {
    let v = &f.values;
    let n = v.len();
    let h = f.grid.step();
    let lo = (v[0].is_finite() && v[1].is_finite()).then(|| (v[1] - v[0]) / h);
    let hi = (v[n - 1].is_finite() && v[n - 2].is_finite()).then(|| (v[n - 1] - v[n - 2]) / h);
    (lo, hi)
}

/// Conjugate of a finite convex function on the whole line of which only a
/// window is sampled. Where `w` is steeper than `f` at a window edge the
/// maximizer runs off the window and the value is reported as `+inf`; this
/// under-reports the domain by the edge-slope gap but never invents a finite
/// value that truncation made up.
pub fn conjugate_windowed(
    f: &ConvexGridFunction,
    out: UniformGrid,
) -> Result<ConvexGridFunction, FenchelError> {
    let pts = finite_nodes(f)?;
    let (slo, shi) = edge_slopes(f);
    let values = out
        .nodes()
        .map(|w| {
            let escapes =
                shi.is_some_and(|s| w > s + ESCAPE_TOL) || slo.is_some_and(|s| w < s - ESCAPE_TOL);
            if escapes {
                f64::INFINITY
            } else {
                sup_affine(&pts, w)
            }
        })
        .collect();
    ConvexGridFunction::new(out, values)
}

/// Windowed conjugate at one abscissa.
pub fn conjugate_windowed_at(f: &ConvexGridFunction, w: f64) -> Result<f64, FenchelError> {
    let pts = finite_nodes(f)?;
    let (slo, shi) = edge_slopes(f);
    if shi.is_some_and(|s| w > s + ESCAPE_TOL) || slo.is_some_and(|s| w < s - ESCAPE_TOL) {
        return Ok(f64::INFINITY);
    }
    let v = sup_affine(&pts, w);
    Ok(if v >= INF_THRESHOLD { f64::INFINITY } else { v })
}

/// Conjugate twice. The intermediate grid spans the range of discrete slopes
/// of `f`, which is where the first conjugate can be finite and relevant.
pub fn biconjugate(
    f: &ConvexGridFunction,
    p_grid: UniformGrid,
) -> Result<ConvexGridFunction, FenchelError> {
    let (a, b) = f.finite_range();
    let h = f.grid.step();
    let (mut smin, mut smax) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in a..b {
        let s = (f.values[i + 1] - f.values[i]) / h;
        smin = smin.min(s);
        smax = smax.max(s);
    }
    if !smin.is_finite() {
        // a single finite node: f is an indicator of a point
        smin = -1.0;
        smax = 1.0;
    }
    if smax - smin < 1e-9 {
        smin -= h;
        smax += h;
    }
    let count = f.grid.count.clamp(3, 4001);
    let dual = conjugate(f, UniformGrid::new(smin, smax, count)?)?;
    conjugate(&dual, p_grid)
}

/// Infimal convolution `(f1 # f2)(v) = min_u f1(u) + f2(v - u)` on `f1`'s
/// grid. `f2` must share the spacing and have its nodes on multiples of it;
/// outside its grid `f2` is `+inf`.
pub fn epi_sum(
    f1: &ConvexGridFunction,
    f2: &ConvexGridFunction,
) -> Result<ConvexGridFunction, FenchelError> {
    let h = f1.grid.step();
    let h2 = f2.grid.step();
    if (h - h2).abs() > 1e-9 * h {
        return Err(FenchelError::GridMismatch(format!("spacings {h} and {h2}")));
    }
    let off = f2.grid.lo / h;
    if (off - off.round()).abs() > 1e-6 {
        return Err(FenchelError::GridMismatch(
            "second grid is not aligned to multiples of the spacing".into(),
        ));
    }
    let off = off.round() as i64;
    let (a2, b2) = f2.finite_range();
    if a2 == 0 || b2 == f2.values.len() - 1 {
        return Err(FenchelError::UnboundedSummand);
    }
    finite_nodes(f1)?;
    let n1 = f1.values.len() as i64;
    let n2 = f2.values.len() as i64;
    let values = (0..n1)
        .map(|i| {
            let mut best = f64::INFINITY;
            for j in 0..n1 {
                let k = i - j - off;
                if !(0..n2).contains(&k) {
                    continue;
                }
                let s = f1.values[j as usize] + f2.values[k as usize];
                if s < best {
                    best = s;
                }
            }
            best
        })
        .collect();
    ConvexGridFunction::new(f1.grid, values)
}

pub const SUM_RULE_TOL: f64 = 2e-2;

/// Nodewise gap between `(h1 + h2)*` and `h1* # h2*` on `v_grid`, both sides
/// computed numerically. A node finite on one side only counts as `+inf`.
pub fn check_sum_rule(
    h1: &ConvexGridFunction,
    h2: &ConvexGridFunction,
    v_grid: UniformGrid,
) -> Result<CheckReport, FenchelError> {
    if h1.grid != h2.grid {
        return Err(FenchelError::GridMismatch(
            "summands must share a grid".into(),
        ));
    }
    let sum: Vec<f64> = h1
        .values
        .iter()
        .zip(&h2.values)
        .map(|(a, b)| a + b)
        .collect();
    let sum = ConvexGridFunction::new(h1.grid, sum)?;
    let lhs = conjugate_windowed(&sum, v_grid)?;
    let rhs = epi_sum(
        &conjugate_windowed(h1, v_grid)?,
        &conjugate_windowed(h2, v_grid)?,
    )?;
    let mut w = WorstTracker::new(3);
    for (i, v) in v_grid.nodes().enumerate() {
        let (a, b) = (lhs.values[i], rhs.values[i]);
        let gap = match (a.is_finite(), b.is_finite()) {
            (true, true) => (a - b).abs(),
            (false, false) => continue,
            _ => f64::INFINITY,
        };
        w.push(&[("v", v)], gap);
    }
    Ok(w.finish("sum_rule", SUM_RULE_TOL))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveDomain {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl EffectiveDomain {
    pub fn closed(lo: f64, hi: f64) -> Self {
        EffectiveDomain {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        (v > self.lo || (self.lo_closed && v == self.lo))
            && (v < self.hi || (self.hi_closed && v == self.hi))
    }

    /// Hausdorff distance between the closures of two intervals.
    pub fn closure_gap(&self, other: &EffectiveDomain) -> f64 {
        (self.lo - other.lo).abs().max((self.hi - other.hi).abs())
    }
}

/// Heuristic: an end is open when the function blows up toward it. Beyond
/// the absolute thresholds, successive increments growing by a factor of at
/// least 2.7 flag a pole (`1/d` growth gives 3, a square-root wall at a
/// closed end at most `1 + sqrt 2`).
fn end_is_open(vals: &[f64], h: f64) -> bool {
    let f0 = vals[0];
    if f0 >= 1e6 {
        return true;
    }
    if vals.len() < 2 {
        return false;
    }
    let d1 = f0 - vals[1];
    if d1 / h >= 1e6 / h {
        return true;
    }
    if vals.len() < 3 {
        return false;
    }
    let d2 = vals[1] - vals[2];
    d1 > 0.0 && d2 > 0.0 && d1 >= 2.7 * d2
}

pub fn effective_domain(f: &ConvexGridFunction) -> EffectiveDomain {
    let (a, b) = f.finite_range();
    let g = &f.grid;
    let h = g.step();
    let n = g.count;
    let run = &f.values[a..=b];
    let head: Vec<f64> = run.iter().take(3).copied().collect();
    let tail: Vec<f64> = run.iter().rev().take(3).copied().collect();
    EffectiveDomain {
        lo: g.node(a),
        hi: g.node(b),
        lo_closed: a == 0 || !end_is_open(&head, h),
        hi_closed: b == n - 1 || !end_is_open(&tail, h),
    }
}

/// Truncated epigraph `{(v, eta) : L(v) <= eta <= eta_cap}` of the piecewise
/// linear interpolant of the finite nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Epigraph {
    pub body: Polygon,
    pub eta_cap: f64,
}

fn truncate(f: &ConvexGridFunction, cap: f64) -> Result<Polygon, FenchelError> {
    let g = &f.grid;
    let (a, b) = f.finite_range();
    let mut pts: Vec<Vec2> = Vec::new();
    for i in a..=b {
        let (v, y) = (g.node(i), f.values[i]);
        if y <= cap {
            pts.push(Vec2::new(v, y));
        }
        if i < b {
            let (v1, y1) = (g.node(i + 1), f.values[i + 1]);
            if (y <= cap) != (y1 <= cap) {
                let s = (cap - y) / (y1 - y);
                pts.push(Vec2::new(v + (v1 - v) * s, cap));
            }
        }
    }
    if pts.is_empty() {
        return Err(FenchelError::CapTooLow {
            cap,
            min: f.min_finite(),
        });
    }
    let vmin = pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let vmax = pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    pts.push(Vec2::new(vmin, cap));
    pts.push(Vec2::new(vmax, cap));
    Ok(Polygon::hull(&pts)?)
}

pub fn build_epigraph(f: &ConvexGridFunction, eta_cap: f64) -> Result<Epigraph, FenchelError> {
    let min = f.min_finite();
    if eta_cap <= min {
        return Err(FenchelError::CapTooLow { cap: eta_cap, min });
    }
    Ok(Epigraph {
        body: truncate(f, eta_cap)?,
        eta_cap,
    })
}

/// `{(v, eta) : L(v) <= eta <= lambda}`; degenerates to the argmin set when
/// `lambda` equals the minimum.
pub fn build_bounded_epigraph(
    f: &ConvexGridFunction,
    lambda: f64,
) -> Result<Epigraph, FenchelError> {
    let min = f.min_finite();
    if lambda < min {
        return Err(FenchelError::EmptyResult { lambda, min });
    }
    Ok(Epigraph {
        body: truncate(f, lambda)?,
        eta_cap: lambda,
    })
}

/// One `(t, x)` slice of a Lagrangian family.
#[derive(Clone, Debug)]
pub struct LagrangianSlice {
    pub t: f64,
    pub x: f64,
    pub l: ConvexGridFunction,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum PropertyStatus {
    Pass {
        worst: f64,
    },
    Fail {
        worst: f64,
    },
    /// Sequence statements: a worst gap is measured but not gated.
    Probed {
        worst_gap: f64,
    },
    NotCheckable,
    NotApplicable {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyResult {
    pub property: &'static str,
    #[serde(flatten)]
    pub status: PropertyStatus,
}

/// Gap of the best nearby value of `other` to `l(v)`, searching `other`'s
/// nodes within `rho` of `v`.
fn probe_gap(l: &ConvexGridFunction, other: &ConvexGridFunction, v: f64, rho: f64) -> f64 {
    let target = l.value_at(v);
    let g = other.grid();
    let mut best = gap(target, other.value_at(v));
    for (u, &y) in g.nodes().zip(other.values()) {
        if (u - v).abs() <= rho {
            best = best.min(gap(target, y));
        }
    }
    best
}

fn gap(a: f64, b: f64) -> f64 {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => (a - b).abs(),
        (false, false) => 0.0,
        _ => f64::INFINITY,
    }
}

/// Numeric probes of the structural properties of a Lagrangian family.
/// `c` is the growth bound in `t` when the Hamiltonian has one.
pub fn check_lagrangian_properties(
    family: &[LagrangianSlice],
    c: Option<&dyn Fn(f64) -> f64>,
) -> Vec<PropertyResult> {
    let mut out = vec![
        PropertyResult {
            property: "L1",
            status: PropertyStatus::NotCheckable,
        },
        PropertyResult {
            property: "L2",
            status: PropertyStatus::NotCheckable,
        },
    ];

    let worst = family
        .iter()
        .map(|s| s.l.convexity_violation())
        .fold(0.0_f64, f64::max);
    out.push(PropertyResult {
        property: "L3",
        status: if worst <= 1e-9 {
            PropertyStatus::Pass { worst }
        } else {
            PropertyStatus::Fail { worst }
        },
    });

    let probes = |same_t: bool| {
        let mut worst_gap = 0.0_f64;
        for base in family {
            let nearest = family
                .iter()
                .filter(|s| !std::ptr::eq(*s, base) && (!same_t || s.t == base.t))
                .min_by(|a, b| {
                    let da = (a.x - base.x).abs() + (a.t - base.t).abs();
                    let db = (b.x - base.x).abs() + (b.t - base.t).abs();
                    da.total_cmp(&db)
                });
            let Some(near) = nearest else { continue };
            let dist = (near.x - base.x).abs() + (near.t - base.t).abs();
            let rho = dist.sqrt().max(2.0 * near.l.grid().step());
            let dom = effective_domain(&base.l);
            for k in 0..9 {
                let v = dom.lo + (dom.hi - dom.lo) * k as f64 / 8.0;
                worst_gap = worst_gap.max(probe_gap(&base.l, &near.l, v, rho));
            }
        }
        worst_gap
    };
    out.push(PropertyResult {
        property: "L4",
        status: PropertyStatus::Probed {
            worst_gap: probes(true),
        },
    });

    out.push(PropertyResult {
        property: "L5",
        status: match c {
            None => PropertyStatus::NotApplicable {
                reason: "no linear growth bound c(t)".into(),
            },
            Some(c) => {
                let worst = family
                    .iter()
                    .map(|s| {
                        let d = effective_domain(&s.l);
                        let bound = c(s.t) * (1.0 + s.x.abs()) + s.l.grid().step();
                        (d.lo.abs() - bound).max(d.hi.abs() - bound)
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                if worst <= 1e-9 {
                    PropertyStatus::Pass { worst }
                } else {
                    PropertyStatus::Fail { worst }
                }
            }
        },
    });
    out.push(PropertyResult {
        property: "L6",
        status: PropertyStatus::Probed {
            worst_gap: probes(false),
        },
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ex21(x: f64) -> ConvexGridFunction {
        ConvexGridFunction::sample(UniformGrid::default_p(), |p| {
            (p.abs() * x.abs() - 1.0).max(0.0)
        })
        .unwrap()
    }

    fn ex22(x: f64) -> ConvexGridFunction {
        ConvexGridFunction::sample(UniformGrid::default_p(), |p| (1.0 + p * p).sqrt() - x.abs())
            .unwrap()
    }

    #[test]
    fn conjugate_oracles() {
        let out = UniformGrid::new(-2.0, 2.0, 401).unwrap();
        let l = conjugate(&ex21(1.0), out).unwrap();
        assert_abs_diff_eq!(l.value_at(0.5), 0.5, epsilon = 1e-2);
        let l = conjugate(&ex22(0.0), out).unwrap();
        assert_abs_diff_eq!(l.value_at(0.0), -1.0, epsilon = 1e-2);
        let q = ConvexGridFunction::sample(UniformGrid::new(-10.0, 10.0, 2001).unwrap(), |p| {
            p * p / 2.0
        })
        .unwrap();
        let l = conjugate(&q, out).unwrap();
        for w in [-2.0, -0.7, 0.0, 1.3, 2.0] {
            assert_abs_diff_eq!(l.value_at(w), w * w / 2.0, epsilon = 1e-2);
        }
    }

    #[test]
    fn windowed_conjugate_marks_escapes() {
        let out = UniformGrid::symmetric(3.0, 0.01).unwrap();
        let l = conjugate_windowed(&ex21(0.5), out).unwrap();
        let d = effective_domain(&l);
        assert_abs_diff_eq!(d.lo, -0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(d.hi, 0.5, epsilon = 1e-9);
        let flat = ConvexGridFunction::sample(UniformGrid::default_p(), |_| 0.0).unwrap();
        let l = conjugate_windowed(&flat, out).unwrap();
        let d = effective_domain(&l);
        assert_eq!((d.lo, d.hi), (0.0, 0.0));
    }

    #[test]
    fn biconjugate_recovers_input() {
        let g = UniformGrid::new(-10.0, 10.0, 2001).unwrap();
        for f in [ex21(1.0), ex22(0.0)] {
            let b = biconjugate(&f, g).unwrap();
            for p in g.nodes() {
                assert_abs_diff_eq!(b.value_at(p), f.value_at(p), epsilon = 2e-2);
            }
        }
        let abs = ConvexGridFunction::sample(UniformGrid::default_p(), f64::abs).unwrap();
        let b = biconjugate(&abs, g).unwrap();
        for p in g.nodes() {
            assert_abs_diff_eq!(b.value_at(p), p.abs(), epsilon = 1e-2);
        }
    }

    #[test]
    fn epi_sum_with_box_indicator() {
        let g = UniformGrid::symmetric(2.0, 0.01).unwrap();
        let f1 = ConvexGridFunction::sample(g, |v| {
            if v.abs() <= 1.0 {
                -(1.0 - v * v).sqrt()
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        let f2 = ConvexGridFunction::sample(g, |v| {
            if v.abs() <= 0.5 + 1e-12 {
                -0.1
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        let s = epi_sum(&f1, &f2).unwrap();
        assert_abs_diff_eq!(s.value_at(0.0), -1.1, epsilon = 1e-2);
        let delta =
            ConvexGridFunction::sample(g, |v| if v == 0.0 { 0.0 } else { f64::INFINITY }).unwrap();
        let s = epi_sum(&f1, &delta).unwrap();
        assert_eq!(s.values(), f1.values());
        let full = ConvexGridFunction::sample(g, |_| 0.0).unwrap();
        assert_eq!(epi_sum(&f1, &full), Err(FenchelError::UnboundedSummand));
    }

    #[test]
    fn domain_flags() {
        let g = UniformGrid::symmetric(2.0, 0.01).unwrap();
        let l = ConvexGridFunction::sample(g, |v| {
            if v.abs() <= 1.0 {
                v.abs()
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        let d = effective_domain(&l);
        assert!(d.lo_closed && d.hi_closed);
        let l = ConvexGridFunction::sample(g, |v| {
            if v > 0.0 && v <= 1.0 {
                1.0 / v
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        let d = effective_domain(&l);
        assert!(!d.lo_closed && d.hi_closed);
        assert_abs_diff_eq!(d.lo, 0.0, epsilon = 0.011);
        assert_abs_diff_eq!(d.hi, 1.0, epsilon = 1e-9);
        let l = ConvexGridFunction::sample(g, |v| {
            if v.abs() <= 1.0 {
                -(1.0 - v * v).sqrt()
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        let d = effective_domain(&l);
        assert!(d.lo_closed && d.hi_closed);
        let l = ConvexGridFunction::sample(g, |v| v * v).unwrap();
        assert_eq!(effective_domain(&l), EffectiveDomain::closed(g.lo, g.hi));
    }

    #[test]
    fn epigraphs() {
        let g = UniformGrid::symmetric(2.0, 0.01).unwrap();
        let l = ConvexGridFunction::sample(g, |v| {
            if v.abs() <= 1.0 {
                -(1.0 - v * v).sqrt()
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        let e = build_epigraph(&l, 2.0).unwrap();
        assert!(e.body.contains(Vec2::new(0.0, -1.0), 1e-9));
        assert!(e.body.contains(Vec2::new(0.0, 2.0), 1e-9));
        assert!(!e.body.contains(Vec2::new(1.5, 0.0), 1e-9));
        let e1 = build_epigraph(&l, 1.0).unwrap();
        assert!(e.body.contains_body(&e1.body, 1e-9));
        let b = build_bounded_epigraph(&l, 0.0).unwrap();
        assert!(b.body.contains(Vec2::new(0.0, -0.5), 1e-9));
        assert!(!b.body.contains(Vec2::new(0.0, 0.5), 1e-9));
        assert!(e.body.contains_body(&b.body, 1e-9));
        assert!(matches!(
            build_epigraph(&l, -1.0),
            Err(FenchelError::CapTooLow { .. })
        ));
        assert!(matches!(
            build_bounded_epigraph(&l, -2.0),
            Err(FenchelError::EmptyResult { .. })
        ));
        let sq =
            ConvexGridFunction::sample(g, |v| if v.abs() <= 1.0 { 0.0 } else { f64::INFINITY })
                .unwrap();
        let e = build_epigraph(&sq, 1.0).unwrap();
        assert_eq!(e.body.len(), 4);
        let pt = build_bounded_epigraph(&sq, 0.0).unwrap();
        assert_eq!(pt.body.len(), 2);
    }

    #[test]
    fn csv_round_trip() {
        let g = UniformGrid::new(-1.0, 1.0, 5).unwrap();
        let f = ConvexGridFunction::sample(g, |v| if v < 0.0 { f64::INFINITY } else { v }).unwrap();
        let text = f.to_csv();
        assert!(text.starts_with("v,value\n-1,inf\n"));
        assert_eq!(ConvexGridFunction::from_csv(&text).unwrap(), f);
    }

    #[test]
    fn improper_is_rejected() {
        let g = UniformGrid::new(0.0, 1.0, 3).unwrap();
        assert_eq!(
            ConvexGridFunction::new(g, vec![f64::INFINITY; 3]),
            Err(FenchelError::ImproperFunction)
        );
    }
}
