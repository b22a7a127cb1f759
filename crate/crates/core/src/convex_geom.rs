//! Compact convex bodies.
//!
//! Planar bodies are stored exactly as convex polygons (counterclockwise,
//! no repeated or collinear vertices; a single point and a segment are
//! allowed). Bodies in 3-space are stored through their support function on a
//! fixed direction design, which is only an inner approximation; operations
//! that need exact faces (projection, the projection map) are planar only.

use std::f64::consts::PI;

use nalgebra::{Vector2, Vector3};
use rand::RngExt;

use crate::error::GeomError;
use crate::report::{CheckReport, WorstTracker};

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;

/// Direction count used by [`Polygon::steiner`] callers that have no opinion.
pub const DEFAULT_STEINER_DIRS: usize = 3600;

/// Angular step (radians) for circle arcs produced by the projection map.
pub const ARC_STEP: f64 = 0.5 * PI / 180.0;

const REL_EPS: f64 = 1e-12;

#[inline]
fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Closest point of segment `[p, q]` to `y`.
fn closest_on_segment(p: Vec2, q: Vec2, y: Vec2) -> Vec2 {
    let e = q - p;
    let ee = e.norm_squared();
    if ee == 0.0 {
        return p;
    }
    let s = ((y - p).dot(&e) / ee).clamp(0.0, 1.0);
    p + e * s
}

/// A compact convex polygon in the plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    verts: Vec<Vec2>,
}

impl Polygon {
    pub fn point(p: Vec2) -> Self {
        Polygon { verts: vec![p] }
    }

    /// Convex hull of a point cloud (monotone chain).
    pub fn hull(points: &[Vec2]) -> Result<Self, GeomError> {
        if points.is_empty() {
            return Err(GeomError::EmptyBody);
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let mut pts: Vec<Vec2> = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();
        if pts.len() == 1 {
            return Ok(Polygon { verts: pts });
        }
        // Keep only left turns; near-collinear triples are dropped.
        let turn = |o: Vec2, a: Vec2, b: Vec2| {
            let (u, v) = (a - o, b - o);
            cross(u, v) > REL_EPS * u.norm() * v.norm()
        };
        let mut lower: Vec<Vec2> = Vec::with_capacity(pts.len());
        for &p in &pts {
            while lower.len() >= 2 && !turn(lower[lower.len() - 2], lower[lower.len() - 1], p) {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Vec2> = Vec::with_capacity(pts.len());
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && !turn(upper[upper.len() - 2], upper[upper.len() - 1], p) {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        // Merge vertices that differ only by rounding.
        let scale = pts.iter().map(|p| p.norm()).fold(1.0_f64, f64::max);
        let close = |a: &Vec2, b: &Vec2| (a - b).norm() <= 1e-10 * scale;
        lower.dedup_by(|b, a| close(a, b));
        while lower.len() > 1 && close(&lower[0], &lower[lower.len() - 1]) {
            lower.pop();
        }
        Ok(Polygon { verts: lower })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.verts
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    fn scale(&self) -> f64 {
        self.verts
            .iter()
            .fold(1.0_f64, |m, v| m.max(v.x.abs()).max(v.y.abs()))
    }

    /// Edges as vertex pairs; a segment contributes one edge, a point none.
    fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.verts.len();
        let count = match n {
            0 | 1 => 0,
            2 => 1,
            _ => n,
        };
        (0..count).map(move |i| (self.verts[i], self.verts[(i + 1) % n]))
    }

    /// Signed clearance of `y` from the boundary for a full-dimensional
    /// polygon: positive inside, negative outside (by at least the distance
    /// to the violated edge line).
    fn clearance(&self, y: Vec2) -> f64 {
        let n = self.verts.len();
        let mut worst = f64::INFINITY;
        for i in 0..n {
            let (p, q) = (self.verts[i], self.verts[(i + 1) % n]);
            let e = q - p;
            let s = cross(e, y - p) / e.norm();
            worst = worst.min(s);
        }
        worst
    }

    pub fn contains(&self, y: Vec2, tol: f64) -> bool {
        if self.verts.len() >= 3 {
            self.clearance(y) >= -tol
        } else {
            self.distance(y) <= tol
        }
    }

    pub fn project_point(&self, y: Vec2) -> Vec2 {
        match self.verts.len() {
            1 => self.verts[0],
            n => {
                if n >= 3 && self.clearance(y) >= 0.0 {
                    return y;
                }
                self.edges()
                    .map(|(p, q)| closest_on_segment(p, q, y))
                    .min_by(|a, b| (a - y).norm_squared().total_cmp(&(b - y).norm_squared()))
                    .expect("polygon has an edge")
            }
        }
    }

    pub fn distance(&self, y: Vec2) -> f64 {
        (self.project_point(y) - y).norm()
    }

    pub fn support_value(&self, dir: Vec2) -> f64 {
        self.verts
            .iter()
            .map(|v| v.dot(&dir))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// A maximizer of `<dir, .>`; on a maximizing edge the minimal-norm point
    /// of that edge is returned so the choice is deterministic.
    pub fn support(&self, dir: Vec2) -> Result<Vec2, GeomError> {
        if dir.norm() == 0.0 || !dir.x.is_finite() || !dir.y.is_finite() {
            return Err(GeomError::Degenerate);
        }
        let h = self.support_value(dir);
        let tol = REL_EPS * dir.norm() * self.scale();
        let n = self.verts.len();
        let mut best: Option<Vec2> = None;
        for i in 0..n {
            let v = self.verts[i];
            if v.dot(&dir) < h - tol {
                continue;
            }
            let next = self.verts[(i + 1) % n];
            let cand = if n > 1 && next.dot(&dir) >= h - tol {
                closest_on_segment(v, next, Vec2::zeros())
            } else {
                v
            };
            best = match best {
                Some(b) if b.norm_squared() <= cand.norm_squared() => Some(b),
                _ => Some(cand),
            };
        }
        Ok(best.expect("nonempty polygon"))
    }

    /// Exact Hausdorff distance; for convex bodies the sup is attained at
    /// vertices.
    pub fn hausdorff(&self, other: &Polygon) -> f64 {
        let one = |a: &Polygon, b: &Polygon| {
            a.verts
                .iter()
                .map(|&v| b.distance(v))
                .fold(0.0_f64, f64::max)
        };
        one(self, other).max(one(other, self))
    }

    /// Largest distance from a vertex of `inner` to `self`.
    pub fn containment_gap(&self, inner: &Polygon) -> f64 {
        inner
            .verts
            .iter()
            .map(|&v| self.distance(v))
            .fold(0.0_f64, f64::max)
    }

    pub fn contains_body(&self, inner: &Polygon, tol: f64) -> bool {
        self.containment_gap(inner) <= tol
    }

    /// Minkowski sum with the box `[-rv, rv] x [-reta, reta]`.
    pub fn minkowski_box(&self, rv: f64, reta: f64) -> Result<Polygon, GeomError> {
        if rv < 0.0 || reta < 0.0 {
            return Err(GeomError::Degenerate);
        }
        let corners = [
            Vec2::new(rv, reta),
            Vec2::new(-rv, reta),
            Vec2::new(-rv, -reta),
            Vec2::new(rv, -reta),
        ];
        let pts: Vec<Vec2> = self
            .verts
            .iter()
            .flat_map(|v| corners.iter().map(move |c| v + c))
            .collect();
        Polygon::hull(&pts)
    }

    /// Intersection with another convex polygon (Sutherland-Hodgman).
    /// `None` when the intersection is empty.
    pub fn intersect(&self, other: &Polygon) -> Result<Option<Polygon>, GeomError> {
        let (subject, clip) = match (self.verts.len() >= 3, other.verts.len() >= 3) {
            (_, true) => (self, other),
            (true, false) => (other, self),
            (false, false) => {
                return Err(GeomError::Unsupported(
                    "intersection of two degenerate polygons",
                ))
            }
        };
        let tol = REL_EPS * clip.scale().max(subject.scale());
        let mut out: Vec<Vec2> = subject.verts.clone();
        let n = clip.verts.len();
        for i in 0..n {
            if out.is_empty() {
                break;
            }
            let (a, b) = (clip.verts[i], clip.verts[(i + 1) % n]);
            let e = b - a;
            let side = |p: Vec2| cross(e, p - a) / e.norm();
            let input = std::mem::take(&mut out);
            let m = input.len();
            for j in 0..m {
                let (p, q) = (input[j], input[(j + 1) % m]);
                let (sp, sq) = (side(p), side(q));
                if sp >= -tol {
                    out.push(p);
                }
                if (sp >= -tol) != (sq >= -tol) {
                    let s = sp / (sp - sq);
                    out.push(p + (q - p) * s);
                }
            }
        }
        if out.is_empty() {
            Ok(None)
        } else {
            Polygon::hull(&out).map(Some)
        }
    }

    /// `P(y, K) = K ∩ B(y, 2 d(y, K))`; circle arcs are sampled on a fixed
    /// angular grid of step [`ARC_STEP`] together with the exact arc
    /// endpoints.
    pub fn proj_map(&self, y: Vec2) -> Result<Polygon, GeomError> {
        if !y.x.is_finite() || !y.y.is_finite() {
            return Err(GeomError::NonFinite);
        }
        let d = self.distance(y);
        if d <= REL_EPS * self.scale().max(y.norm()) {
            return Ok(Polygon::point(y));
        }
        let r = 2.0 * d;
        let mut pts: Vec<Vec2> = self
            .verts
            .iter()
            .copied()
            .filter(|v| (v - y).norm() <= r)
            .collect();
        let mut angles: Vec<f64> = Vec::new();
        for (p, q) in self.edges() {
            // |p + s e - y|^2 = r^2
            let e = q - p;
            let f = p - y;
            let a = e.norm_squared();
            let b = 2.0 * f.dot(&e);
            let c = f.norm_squared() - r * r;
            let disc = b * b - 4.0 * a * c;
            if a == 0.0 || disc < 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            for s in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                if (0.0..=1.0).contains(&s) {
                    let z = p + e * s;
                    pts.push(z);
                    angles.push((z.y - y.y).atan2(z.x - y.x));
                }
            }
        }
        if self.verts.len() >= 3 && angles.len() >= 2 {
            angles.sort_by(f64::total_cmp);
            let m = angles.len();
            for i in 0..m {
                let a0 = angles[i];
                let a1 = if i + 1 < m {
                    angles[i + 1]
                } else {
                    angles[0] + 2.0 * PI
                };
                if a1 - a0 <= 1e-12 {
                    continue;
                }
                let mid = 0.5 * (a0 + a1);
                if !self.contains(y + Vec2::new(mid.cos(), mid.sin()) * r, 0.0) {
                    continue;
                }
                let first = (a0 / ARC_STEP).floor() as i64 + 1;
                let last = (a1 / ARC_STEP).ceil() as i64 - 1;
                for k in first..=last {
                    let th = k as f64 * ARC_STEP;
                    pts.push(y + Vec2::new(th.cos(), th.sin()) * r);
                }
            }
        }
        Polygon::hull(&pts)
    }

    /// Exact Steiner point of a polygon: vertices weighted by their exterior
    /// angles over `2 pi`.
    pub fn steiner_exact(&self) -> Vec2 {
        let v = &self.verts;
        match v.len() {
            0 => Vec2::zeros(),
            1 => v[0],
            2 => 0.5 * (v[0] + v[1]),
            n => {
                let mut acc = Vec2::zeros();
                for i in 0..n {
                    let a = v[i] - v[(i + n - 1) % n];
                    let b = v[(i + 1) % n] - v[i];
                    let turn = a.perp(&b).atan2(a.dot(&b));
                    acc += v[i] * turn;
                }
                acc / (2.0 * PI)
            }
        }
    }

    /// Steiner point by averaging support points over `n_dirs` equally
    /// spaced directions. The support vertex advances monotonically with the
    /// angle, so this costs `O(n_dirs + len)`.
    pub fn steiner(&self, n_dirs: usize) -> Result<Vec2, GeomError> {
        if n_dirs == 0 {
            return Err(GeomError::Degenerate);
        }
        let n = self.verts.len();
        if n == 1 {
            return Ok(self.verts[0]);
        }
        let tol = REL_EPS * self.scale();
        let dir = |j: usize| {
            let th = 2.0 * PI * j as f64 / n_dirs as f64;
            Vec2::new(th.cos(), th.sin())
        };
        let u0 = dir(0);
        let mut i = (0..n)
            .max_by(|&a, &b| self.verts[a].dot(&u0).total_cmp(&self.verts[b].dot(&u0)))
            .unwrap();
        let prev = (i + n - 1) % n;
        if self.verts[prev].dot(&u0) >= self.verts[i].dot(&u0) - tol {
            i = prev;
        }
        let mut acc = Vec2::zeros();
        for j in 0..n_dirs {
            let u = dir(j);
            let mut steps = 0;
            while steps < n
                && (self.verts[(i + 1) % n].dot(&u) > self.verts[i].dot(&u) + tol
                    || (self.verts[(i + 1) % n] - self.verts[i]).norm() <= tol)
            {
                i = (i + 1) % n;
                steps += 1;
            }
            let (v, next) = (self.verts[i], self.verts[(i + 1) % n]);
            acc += if next.dot(&u) >= v.dot(&u) - tol {
                closest_on_segment(v, next, Vec2::zeros())
            } else {
                v
            };
        }
        let s = acc / n_dirs as f64;
        // Quadrature can leave the body by rounding; pull it back.
        Ok(if self.contains(s, 0.0) {
            s
        } else {
            self.project_point(s)
        })
    }
}

/// Random polygon: hull of `3..=max_pts` points uniform in a disc.
pub fn random_polygon<R: RngExt>(
    rng: &mut R,
    center: Vec2,
    radius: f64,
    max_pts: usize,
) -> Polygon {
    let k = rng.random_range(3..=max_pts.max(3));
    let pts: Vec<Vec2> = (0..k)
        .map(|_| {
            let th = rng.random_range(0.0..2.0 * PI);
            let rho = radius * rng.random_range(0.0_f64..1.0).sqrt();
            center + Vec2::new(th.cos(), th.sin()) * rho
        })
        .collect();
    Polygon::hull(&pts).expect("finite points")
}

/// Quasi-uniform sphere design: a Fibonacci lattice turned by a rotation
/// derived from `seed`.
pub fn sphere_design(count: usize, seed: u64) -> Vec<Vec3> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let axis = Vec3::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    );
    let angle = rng.random_range(0.0..2.0 * PI);
    let rot = nalgebra::Rotation3::from_axis_angle(
        &nalgebra::Unit::new_normalize(axis + Vec3::new(0.0, 0.0, 1e-9)),
        angle,
    );
    let golden = PI * (3.0 - 5.0_f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            rot * Vec3::new(rho * th.cos(), rho * th.sin(), z)
        })
        .collect()
}

/// Convex body in 3-space known through support points on a direction design.
#[derive(Clone, Debug)]
pub struct SampledBody {
    dirs: Vec<Vec3>,
    points: Vec<Vec3>,
}

impl SampledBody {
    /// Support samples of the hull of `cloud`.
    pub fn from_points(cloud: &[Vec3], dirs: &[Vec3]) -> Result<Self, GeomError> {
        if cloud.is_empty() || dirs.is_empty() {
            return Err(GeomError::EmptyBody);
        }
        if cloud.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(GeomError::NonFinite);
        }
        let points = dirs
            .iter()
            .map(|u| {
                *cloud
                    .iter()
                    .max_by(|a, b| a.dot(u).total_cmp(&b.dot(u)))
                    .unwrap()
            })
            .collect();
        Ok(SampledBody {
            dirs: dirs.to_vec(),
            points,
        })
    }

    pub fn support_points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn support_value(&self, dir: Vec3) -> f64 {
        self.points
            .iter()
            .map(|p| p.dot(&dir))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn support(&self, dir: Vec3) -> Result<Vec3, GeomError> {
        if dir.norm() == 0.0 {
            return Err(GeomError::Degenerate);
        }
        Ok(*self
            .points
            .iter()
            .max_by(|a, b| a.dot(&dir).total_cmp(&b.dot(&dir)))
            .unwrap())
    }

    /// Support-function lower bound `max_u <u,y> - h(u)` over the design.
    pub fn distance(&self, y: Vec3) -> f64 {
        self.dirs
            .iter()
            .map(|u| u.dot(&y) - self.support_value(*u))
            .fold(0.0_f64, f64::max)
    }

    pub fn hausdorff(&self, other: &SampledBody) -> f64 {
        self.dirs
            .iter()
            .chain(other.dirs.iter())
            .map(|u| (self.support_value(*u) - other.support_value(*u)).abs())
            .fold(0.0_f64, f64::max)
    }

    pub fn contains_body(&self, inner: &SampledBody, tol: f64) -> bool {
        inner.points.iter().all(|p| self.distance(*p) <= tol)
    }

    /// Minkowski sum with `[-rv, rv]^2 x [-reta, reta]`.
    pub fn minkowski_box(&self, rv: f64, reta: f64) -> Result<SampledBody, GeomError> {
        if rv < 0.0 || reta < 0.0 {
            return Err(GeomError::Degenerate);
        }
        let sgn = |c: f64| if c >= 0.0 { 1.0 } else { -1.0 };
        let points = self
            .dirs
            .iter()
            .zip(&self.points)
            .map(|(u, p)| p + Vec3::new(rv * sgn(u.x), rv * sgn(u.y), reta * sgn(u.z)))
            .collect();
        Ok(SampledBody {
            dirs: self.dirs.clone(),
            points,
        })
    }

    /// Mean support point over the design.
    pub fn steiner(&self) -> Vec3 {
        self.points.iter().sum::<Vec3>() / self.points.len() as f64
    }
}

/// Either backend behind one interface; points are passed as slices whose
/// length must match the ambient dimension.
#[derive(Clone, Debug)]
pub enum ConvexBody {
    Planar(Polygon),
    Spatial(SampledBody),
}

impl ConvexBody {
    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Planar(_) => 2,
            ConvexBody::Spatial(_) => 3,
        }
    }

    fn v2(&self, y: &[f64]) -> Result<Vec2, GeomError> {
        match y {
            [a, b] => Ok(Vec2::new(*a, *b)),
            _ => Err(GeomError::DimMismatch {
                expected: 2,
                got: y.len(),
            }),
        }
    }

    fn v3(&self, y: &[f64]) -> Result<Vec3, GeomError> {
        match y {
            [a, b, c] => Ok(Vec3::new(*a, *b, *c)),
            _ => Err(GeomError::DimMismatch {
                expected: 3,
                got: y.len(),
            }),
        }
    }

    /// `(support value, support point)`.
    pub fn support(&self, dir: &[f64]) -> Result<(f64, Vec<f64>), GeomError> {
        match self {
            ConvexBody::Planar(p) => {
                let u = self.v2(dir)?;
                let v = p.support(u)?;
                Ok((p.support_value(u), vec![v.x, v.y]))
            }
            ConvexBody::Spatial(s) => {
                let u = self.v3(dir)?;
                let v = s.support(u)?;
                Ok((s.support_value(u), vec![v.x, v.y, v.z]))
            }
        }
    }

    pub fn distance(&self, y: &[f64]) -> Result<f64, GeomError> {
        match self {
            ConvexBody::Planar(p) => Ok(p.distance(self.v2(y)?)),
            ConvexBody::Spatial(s) => Ok(s.distance(self.v3(y)?)),
        }
    }

    pub fn project_point(&self, y: &[f64]) -> Result<Vec<f64>, GeomError> {
        match self {
            ConvexBody::Planar(p) => {
                let z = p.project_point(self.v2(y)?);
                Ok(vec![z.x, z.y])
            }
            ConvexBody::Spatial(_) => {
                Err(GeomError::Unsupported("projection in the sampled backend"))
            }
        }
    }

    pub fn hausdorff(&self, other: &ConvexBody) -> Result<f64, GeomError> {
        match (self, other) {
            (ConvexBody::Planar(a), ConvexBody::Planar(b)) => Ok(a.hausdorff(b)),
            (ConvexBody::Spatial(a), ConvexBody::Spatial(b)) => Ok(a.hausdorff(b)),
            _ => Err(GeomError::DimMismatch {
                expected: self.dim(),
                got: other.dim(),
            }),
        }
    }

    pub fn minkowski_inflate(&self, rv: f64, reta: f64) -> Result<ConvexBody, GeomError> {
        match self {
            ConvexBody::Planar(p) => p.minkowski_box(rv, reta).map(ConvexBody::Planar),
            ConvexBody::Spatial(s) => s.minkowski_box(rv, reta).map(ConvexBody::Spatial),
        }
    }

    pub fn contains_body(&self, inner: &ConvexBody, tol: f64) -> Result<bool, GeomError> {
        match (self, inner) {
            (ConvexBody::Planar(a), ConvexBody::Planar(b)) => Ok(a.contains_body(b, tol)),
            (ConvexBody::Spatial(a), ConvexBody::Spatial(b)) => Ok(a.contains_body(b, tol)),
            _ => Err(GeomError::DimMismatch {
                expected: self.dim(),
                got: inner.dim(),
            }),
        }
    }

    pub fn proj_map(&self, y: &[f64]) -> Result<ConvexBody, GeomError> {
        match self {
            ConvexBody::Planar(p) => p.proj_map(self.v2(y)?).map(ConvexBody::Planar),
            ConvexBody::Spatial(_) => Err(GeomError::Unsupported(
                "projection map in the sampled backend",
            )),
        }
    }

    pub fn steiner(&self, n_dirs: usize) -> Result<Vec<f64>, GeomError> {
        match self {
            ConvexBody::Planar(p) => p.steiner(n_dirs).map(|v| vec![v.x, v.y]),
            ConvexBody::Spatial(s) => {
                let v = s.steiner();
                Ok(vec![v.x, v.y, v.z])
            }
        }
    }
}

pub const PROJ_LIP: f64 = 5.0;
pub const PROJ_SLACK: f64 = 1e-3;
pub const STEINER_LIP: f64 = 2.0 * 1.05;
pub const TRIANGLE_TOL: f64 = 2e-3;

/// Lipschitz checks for the projection map and the Steiner point on `pairs`
/// seeded random polygon pairs inside `B(0, 10)`, plus the sampled Steiner
/// point of the unit right triangle against the exact one.
pub fn geometry_suite(
    seed: u64,
    pairs: usize,
    n_dirs: usize,
) -> Result<Vec<CheckReport>, GeomError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let disc = |rng: &mut rand_chacha::ChaCha8Rng, r: f64| {
        let th = rng.random_range(0.0..2.0 * PI);
        let rho = r * rng.random_range(0.0_f64..1.0).sqrt();
        Vec2::new(th.cos(), th.sin()) * rho
    };
    let mut proj = WorstTracker::new(3);
    let mut stein = WorstTracker::new(3);
    for i in 0..pairs {
        let body = |rng: &mut rand_chacha::ChaCha8Rng| {
            let c = disc(rng, 4.0);
            let r = rng.random_range(0.5..5.0);
            random_polygon(rng, c, r, 12)
        };
        let k = body(&mut rng);
        // every other pair is a small perturbation of the first body
        let d = if i % 2 == 0 {
            let amp = rng.random_range(0.0..0.5);
            let pts: Vec<Vec2> = k
                .vertices()
                .iter()
                .map(|v| v + disc(&mut rng, amp))
                .collect();
            Polygon::hull(&pts)?
        } else {
            body(&mut rng)
        };
        let x = disc(&mut rng, 9.0);
        let y = if i % 4 < 2 {
            x + disc(&mut rng, 0.5)
        } else {
            disc(&mut rng, 9.0)
        };
        let hd = k.hausdorff(&d);
        let at = [("pair", i as f64)];
        let lhs = k.proj_map(x)?.hausdorff(&d.proj_map(y)?);
        proj.push(&at, lhs - PROJ_LIP * (hd + (x - y).norm()));
        let ds = (k.steiner(n_dirs)? - d.steiner(n_dirs)?).norm();
        stein.push(&at, ds - STEINER_LIP * hd);
    }
    let tri = Polygon::hull(&[
        Vec2::new(0.0, 0.0),
        Vec2::new(1.0, 0.0),
        Vec2::new(0.0, 1.0),
    ])?;
    let gap = (tri.steiner(n_dirs)? - tri.steiner_exact()).norm();
    Ok(vec![
        proj.finish("projection_lipschitz", PROJ_SLACK),
        stein.finish("steiner_lipschitz", 0.0),
        CheckReport::single(
            "steiner_triangle",
            &[("n_dirs", n_dirs as f64)],
            gap,
            TRIANGLE_TOL,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn disc(center: Vec2, r: f64, n: usize) -> Polygon {
        let pts: Vec<Vec2> = (0..n)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / n as f64;
                center + Vec2::new(th.cos(), th.sin()) * r
            })
            .collect();
        Polygon::hull(&pts).unwrap()
    }

    fn tri() -> Polygon {
        Polygon::hull(&[
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn hull_drops_interior_and_collinear() {
        let p = Polygon::hull(&[
            Vec2::new(0.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.2, 0.2),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(p.len(), 4);
        let seg = Polygon::hull(&[
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.5, 0.5),
        ])
        .unwrap();
        assert_eq!(seg.len(), 2);
        let pt = Polygon::hull(&[Vec2::new(2.0, 3.0), Vec2::new(2.0, 3.0)]).unwrap();
        assert_eq!(pt.len(), 1);
        assert!(Polygon::hull(&[]).is_err());
    }

    #[test]
    fn disc_operations() {
        let d = disc(Vec2::zeros(), 1.0, 720);
        let s = d.support(Vec2::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(s.x, 1.0, epsilon = 2e-4);
        assert_abs_diff_eq!(s.y, 0.0, epsilon = 2e-4);
        assert_abs_diff_eq!(d.distance(Vec2::new(3.0, 0.0)), 2.0, epsilon = 2e-4);
        let z = d.project_point(Vec2::new(2.0, 0.0));
        assert_abs_diff_eq!(z.x, 1.0, epsilon = 2e-4);
        assert_abs_diff_eq!(z.y, 0.0, epsilon = 2e-4);
        let sq = Polygon::hull(&[
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(sq.project_point(Vec2::new(2.0, 2.0)), Vec2::new(1.0, 1.0));
        let seg = Polygon::hull(&[Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)]).unwrap();
        assert_eq!(seg.distance(Vec2::new(0.0, 2.0)), 2.0);
    }

    #[test]
    fn support_picks_min_norm_on_face() {
        let sq = Polygon::hull(&[
            Vec2::new(-1.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 3.0),
            Vec2::new(-1.0, 3.0),
        ])
        .unwrap();
        let s = sq.support(Vec2::new(0.0, -1.0)).unwrap();
        assert_abs_diff_eq!(s.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.y, 1.0, epsilon = 1e-12);
        assert!(sq.support(Vec2::zeros()).is_err());
    }

    #[test]
    fn hausdorff_of_unit_disc_and_origin() {
        let d = disc(Vec2::zeros(), 1.0, 720);
        assert_abs_diff_eq!(
            d.hausdorff(&Polygon::point(Vec2::zeros())),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn proj_map_of_point_inside_is_singleton() {
        let p = tri().proj_map(Vec2::new(0.2, 0.2)).unwrap();
        assert_eq!(p.vertices(), &[Vec2::new(0.2, 0.2)]);
    }

    #[test]
    fn proj_map_cuts_a_lens() {
        let d = disc(Vec2::zeros(), 1.0, 720);
        let y = Vec2::new(2.0, 0.0);
        let p = d.proj_map(y).unwrap();
        // every point within 2 d(y, K) of y and inside K
        for v in p.vertices() {
            assert!((v - y).norm() <= 2.0 + 1e-9);
            assert!(d.distance(*v) <= 1e-9);
        }
        // nearest point of K belongs to it
        assert!(p.distance(Vec2::new(1.0, 0.0)) < 1e-3);
    }

    #[test]
    fn steiner_of_triangle_matches_exterior_angle_weights() {
        let s = tri().steiner(DEFAULT_STEINER_DIRS).unwrap();
        // weights pi/2, 3pi/4, 3pi/4 over 2pi
        assert_abs_diff_eq!(
            tri().steiner_exact(),
            Vec2::new(0.375, 0.375),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(s.x, 0.375, epsilon = 2e-3);
        assert_abs_diff_eq!(s.y, 0.375, epsilon = 2e-3);
    }

    #[test]
    fn geometry_suite_small() {
        let reports = geometry_suite(7, 20, 720).unwrap();
        assert_eq!(reports.len(), 3);
        for r in &reports[..2] {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn steiner_of_segment_is_midpoint() {
        let seg = Polygon::hull(&[Vec2::new(0.0, 0.0), Vec2::new(0.0, 2.0)]).unwrap();
        let s = seg.steiner(3600).unwrap();
        assert_abs_diff_eq!(s.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.y, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn minkowski_box_of_point_is_box() {
        let b = Polygon::point(Vec2::new(1.0, 1.0))
            .minkowski_box(0.5, 0.25)
            .unwrap();
        assert_eq!(b.len(), 4);
        assert!(b.contains(Vec2::new(1.5, 1.25), 1e-12));
        assert!(!b.contains(Vec2::new(1.6, 1.0), 1e-12));
    }

    #[test]
    fn intersection_of_overlapping_squares() {
        let a = Polygon::hull(&[
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(0.0, 2.0),
        ])
        .unwrap();
        let b = Polygon::hull(&[
            Vec2::new(1.0, 1.0),
            Vec2::new(3.0, 1.0),
            Vec2::new(3.0, 3.0),
            Vec2::new(1.0, 3.0),
        ])
        .unwrap();
        let c = a.intersect(&b).unwrap().unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.contains(Vec2::new(1.5, 1.5), 0.0));
        let far = Polygon::hull(&[
            Vec2::new(5.0, 5.0),
            Vec2::new(6.0, 5.0),
            Vec2::new(5.0, 6.0),
        ])
        .unwrap();
        assert!(a.intersect(&far).unwrap().is_none());
    }

    #[test]
    fn sampled_ball_steiner_is_center() {
        let dirs = sphere_design(2000, 7);
        let c = Vec3::new(1.0, -2.0, 0.5);
        let cloud: Vec<Vec3> = sphere_design(4000, 3).into_iter().map(|u| c + u).collect();
        let b = SampledBody::from_points(&cloud, &dirs).unwrap();
        assert!((b.steiner() - c).norm() < 2e-2);
        assert_abs_diff_eq!(
            b.distance(c + Vec3::new(3.0, 0.0, 0.0)),
            2.0,
            epsilon = 2e-2
        );
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let k = ConvexBody::Planar(tri());
        assert!(matches!(
            k.distance(&[1.0, 2.0, 3.0]),
            Err(GeomError::DimMismatch {
                expected: 2,
                got: 3
            })
        ));
    }
}
