//! JSON-in, JSON-out bindings for the static demo page in `www/`.

use hamrep::builder::{build_compact, build_noncompact, APlan, RepresentationTriple};
use hamrep::convex_geom::{Polygon, Vec2, DEFAULT_STEINER_DIRS};
use hamrep::fenchel::{conjugate_windowed, UniformGrid};
use hamrep::zoo::{builtin, GridPolicy, HamiltonianSpec};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(err)
}

/// JSON has no infinity; points off the domain become `null`.
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn spec(name: &str) -> Result<HamiltonianSpec, JsError> {
    builtin(name).map_err(err)
}

/// Coarser than the batch default so a slider drag stays interactive.
fn demo_policy() -> GridPolicy {
    GridPolicy {
        p_grid: UniformGrid::new(-50.0, 50.0, 2001).expect("valid grid"),
        v_step: 0.02,
        ..GridPolicy::default()
    }
}

#[wasm_bindgen]
pub fn builtin_names() -> String {
    serde_json::to_string(&hamrep::zoo::BUILTIN_NAMES).expect("strings serialize")
}

#[derive(Serialize)]
struct ConjugatePlot {
    p: Vec<f64>,
    h: Vec<f64>,
    v: Vec<f64>,
    l: Vec<Option<f64>>,
    oracle: Vec<Option<f64>>,
}

/// `H(t,x,.)` on `[-5, 5]` and its numeric transform next to the closed form.
#[wasm_bindgen]
pub fn conjugate_plot(name: &str, t: f64, x: f64) -> Result<String, JsError> {
    let s = spec(name)?;
    let pol = demo_policy();
    let h = s.h_slice(t, x, pol.p_grid);
    let w = s.v_half_width(t, x, &pol).min(4.0);
    let vg = UniformGrid::symmetric(w, pol.v_step).map_err(err)?;
    let l = conjugate_windowed(&h, vg).map_err(err)?;
    let p: Vec<f64> = (0..=200).map(|i| -5.0 + 0.05 * i as f64).collect();
    let v: Vec<f64> = vg.nodes().collect();
    let oracle = match &s.oracle_l {
        Some(o) => v.iter().map(|&vv| finite(o(t, x, vv))).collect(),
        None => vec![None; v.len()],
    };
    to_json(&ConjugatePlot {
        h: p.iter().map(|&q| s.h(t, x, q)).collect(),
        p,
        l: l.values().iter().map(|&y| finite(y)).collect(),
        v,
        oracle,
    })
}

#[derive(Serialize)]
struct ProjView {
    body: Vec<[f64; 2]>,
    proj: Vec<[f64; 2]>,
    steiner: [f64; 2],
    steiner_exact: [f64; 2],
    distance: f64,
}

fn xy(v: &Vec2) -> [f64; 2] {
    [v.x, v.y]
}

/// Hull of `points` (JSON `[[x, y], ...]`), `P(y, K)` and the Steiner point
/// of the projection.
#[wasm_bindgen]
pub fn proj_map(points: &str, yx: f64, yy: f64) -> Result<String, JsError> {
    let raw: Vec<[f64; 2]> = serde_json::from_str(points).map_err(err)?;
    let pts: Vec<Vec2> = raw.iter().map(|p| Vec2::new(p[0], p[1])).collect();
    let k = Polygon::hull(&pts).map_err(err)?;
    let y = Vec2::new(yx, yy);
    let p = k.proj_map(y).map_err(err)?;
    to_json(&ProjView {
        body: k.vertices().iter().map(xy).collect(),
        proj: p.vertices().iter().map(xy).collect(),
        steiner: xy(&p.steiner(DEFAULT_STEINER_DIRS).map_err(err)?),
        steiner_exact: xy(&p.steiner_exact()),
        distance: k.distance(y),
    })
}

#[derive(Serialize)]
struct RepView {
    epigraph: Vec<[f64; 2]>,
    controls: Vec<[f64; 2]>,
    images: Vec<[f64; 2]>,
    p: Vec<f64>,
    h: Vec<f64>,
    reconstructed: Vec<f64>,
    m: f64,
}

/// Control samples of the built triple at `(t, x)`, their images `e(a)`
/// and `H` against the reconstruction `max_a { p f - l }`.
#[wasm_bindgen]
pub fn representation(name: &str, t: f64, x: f64, compact: bool) -> Result<String, JsError> {
    let s = spec(name)?;
    let pol = demo_policy();
    let triple: RepresentationTriple = if compact {
        let lam = s
            .lambda_bound
            .clone()
            .ok_or_else(|| JsError::new("no bound on file for a compact build"))?;
        build_compact(&s, lam, &pol)
    } else {
        build_noncompact(&s, &pol)
    }
    .map_err(err)?;
    let plan = match triple.default_plan() {
        APlan::Polar { .. } => APlan::Polar {
            rings: 8,
            spokes: 36,
        },
        APlan::Box { half, .. } => APlan::Box { half, per_axis: 15 },
    };
    let slice = triple.slice(t, x).map_err(err)?;
    let cap = slice.l.finite_range();
    let top = slice.l.values()[cap.0..=cap.1]
        .iter()
        .fold(0.0_f64, |a, &b| a.max(b))
        .min(6.0);
    let epi = slice.epigraph(top + 1.0).map_err(err)?;
    let samples = triple.samples(t, x, &plan).map_err(err)?;
    let p: Vec<f64> = (0..=40).map(|i| -3.0 + 0.15 * i as f64).collect();
    let reconstructed = triple.reconstruct(t, x, &p).map_err(err)?;
    to_json(&RepView {
        epigraph: epi.vertices().iter().map(xy).collect(),
        controls: samples.iter().map(|s| xy(&(s.a * slice.m))).collect(),
        images: samples.iter().map(|s| xy(&s.e)).collect(),
        h: p.iter().map(|&q| s.h(t, x, q)).collect(),
        p,
        reconstructed,
        m: slice.m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_serialize() {
        let c: serde_json::Value =
            serde_json::from_str(&conjugate_plot("ex_2_2", 0.0, 0.5).map_err(|_| ()).unwrap())
                .unwrap();
        assert_eq!(c["p"].as_array().unwrap().len(), 201);
        let pm = proj_map("[[0,0],[2,0],[0,2]]", 3.0, 3.0)
            .map_err(|_| ())
            .unwrap();
        let pm: serde_json::Value = serde_json::from_str(&pm).unwrap();
        assert!(pm["distance"].as_f64().unwrap() > 2.0);
        let r = representation("ex_2_1", 0.5, 0.5, false)
            .map_err(|_| ())
            .unwrap();
        let r: serde_json::Value = serde_json::from_str(&r).unwrap();
        let (h, rec) = (
            r["h"].as_array().unwrap(),
            r["reconstructed"].as_array().unwrap(),
        );
        for (a, b) in h.iter().zip(rec) {
            assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() < 5e-2);
        }
    }
}
