use hamrep::convex_geom::{Polygon, Vec2};
use hamrep::expr::Expr;
use hamrep::fenchel::{biconjugate, conjugate, epi_sum, ConvexGridFunction, UniformGrid};
use proptest::prelude::*;

fn pt() -> impl Strategy<Value = Vec2> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

fn polygon() -> impl Strategy<Value = Polygon> {
    prop::collection::vec(pt(), 1..12).prop_map(|p| Polygon::hull(&p).unwrap())
}

/// `a |p - c| + b (p - c)^2 + d` with `a, b >= 0`.
fn convex_coeffs() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.0..2.0f64, 0.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
}

fn sampled(grid: UniformGrid, (a, b, c, d): (f64, f64, f64, f64)) -> ConvexGridFunction {
    ConvexGridFunction::sample(grid, |p| a * (p - c).abs() + b * (p - c).powi(2) + d).unwrap()
}

fn p_grid() -> UniformGrid {
    UniformGrid::new(-5.0, 5.0, 201).unwrap()
}

fn v_grid() -> UniformGrid {
    UniformGrid::new(-3.0, 3.0, 121).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn hull_contains_its_points(pts in prop::collection::vec(pt(), 1..20)) {
        let h = Polygon::hull(&pts).unwrap();
        for p in &pts {
            prop_assert!(h.contains(*p, 1e-9));
        }
        let again = Polygon::hull(h.vertices()).unwrap();
        prop_assert!(h.hausdorff(&again) <= 1e-12);
    }

    #[test]
    fn near_duplicate_points_do_not_break_steiner(base in polygon(), eps in 0.0..1e-11f64) {
        let mut pts = base.vertices().to_vec();
        pts.extend(base.vertices().iter().map(|v| v + Vec2::new(eps, -eps)));
        let p = Polygon::hull(&pts).unwrap();
        let (a, b) = (base.steiner(720).unwrap(), p.steiner(720).unwrap());
        prop_assert!((a - b).norm() <= 1e-6);
    }

    #[test]
    fn hausdorff_is_a_metric(a in polygon(), b in polygon(), c in polygon()) {
        prop_assert!(a.hausdorff(&a) <= 1e-12);
        prop_assert!((a.hausdorff(&b) - b.hausdorff(&a)).abs() <= 1e-12);
        prop_assert!(a.hausdorff(&c) <= a.hausdorff(&b) + b.hausdorff(&c) + 1e-9);
    }

    #[test]
    fn steiner_point_lies_in_the_body(k in polygon()) {
        let s = k.steiner(720).unwrap();
        prop_assert!(k.contains(s, 1e-9));
        prop_assert!((s - k.steiner_exact()).norm() <= 2e-2 * (1.0 + k.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max)));
    }

    #[test]
    fn proj_map_stays_in_body_and_ball(k in polygon(), y in pt()) {
        let p = k.proj_map(y).unwrap();
        let d = k.distance(y);
        for v in p.vertices() {
            prop_assert!(k.contains(*v, 1e-7));
            prop_assert!((v - y).norm() <= 2.0 * d + 1e-7);
        }
        prop_assert!(p.contains(k.project_point(y), 1e-3));
    }

    #[test]
    fn projection_is_nearest(k in polygon(), y in pt()) {
        let q = k.project_point(y);
        prop_assert!(k.contains(q, 1e-9));
        for v in k.vertices() {
            prop_assert!((q - y).norm() <= (v - y).norm() + 1e-9);
        }
    }

    #[test]
    fn fenchel_young(c in convex_coeffs()) {
        let f = sampled(p_grid(), c);
        let g = conjugate(&f, v_grid()).unwrap();
        for (i, p) in p_grid().nodes().enumerate().step_by(10) {
            for (j, v) in v_grid().nodes().enumerate().step_by(10) {
                prop_assert!(f.values()[i] + g.values()[j] >= p * v - 1e-9);
            }
        }
    }

    #[test]
    fn conjugation_reverses_order(c in convex_coeffs(), shift in 0.0..2.0f64) {
        let f = sampled(p_grid(), c);
        let g = sampled(p_grid(), (c.0, c.1, c.2, c.3 + shift));
        let (fs, gs) = (conjugate(&f, v_grid()).unwrap(), conjugate(&g, v_grid()).unwrap());
        for (a, b) in fs.values().iter().zip(gs.values()) {
            prop_assert!(a + 1e-12 >= *b);
        }
    }

    #[test]
    fn conjugate_is_convex(c in convex_coeffs()) {
        let g = conjugate(&sampled(p_grid(), c), v_grid()).unwrap();
        prop_assert!(g.convexity_violation() <= 1e-9);
    }

    #[test]
    fn biconjugate_is_below(c in convex_coeffs()) {
        let f = sampled(p_grid(), c);
        let ff = biconjugate(&f, p_grid()).unwrap();
        for (a, b) in ff.values().iter().zip(f.values()) {
            prop_assert!(*a <= b + 1e-9);
        }
    }

    #[test]
    fn epi_sum_with_zero_at_origin_is_identity(c in convex_coeffs()) {
        let f = sampled(v_grid(), c);
        let h = v_grid().step();
        let delta = ConvexGridFunction::new(UniformGrid::new(-h, h, 3).unwrap(), vec![f64::INFINITY, 0.0, f64::INFINITY]).unwrap();
        let s = epi_sum(&f, &delta).unwrap();
        for (a, b) in s.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn csv_round_trip(c in convex_coeffs()) {
        let f = sampled(v_grid(), c);
        let back = ConvexGridFunction::from_csv(&f.to_csv()).unwrap();
        prop_assert_eq!(back.values(), f.values());
    }

    #[test]
    fn expressions_match_rust(x in -5.0..5.0f64, p in -5.0..5.0f64) {
        let e = Expr::parse("abs(p)*x - max(x, p)^2 / (1 + sqrt(x*x + 1))", &["x", "p"]).unwrap();
        let want = p.abs() * x - x.max(p).powi(2) / (1.0 + (x * x + 1.0).sqrt());
        prop_assert!((e.eval(&[x, p]) - want).abs() <= 1e-12);
    }
}
