use std::f64::consts::TAU;

use fixloc_core::dynamics::{
    counterexample_family, find_capital_point, fixed_point_in_curve, CapitalConfig, DiffeoMap, Mat2, MapSpec,
};
use fixloc_core::geom::{convex_hull, point_in_hull, validate_angle_hypothesis, ClosedPolyCurve, HullMembership, Point2};
use fixloc_core::untangle::{decompose, DecomposeConfig};
use fixloc_core::winding::{winding_number, winding_number_oracle};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn point(range: f64) -> impl Strategy<Value = Point2> {
    (-range..range, -range..range).prop_map(|(x, y)| Point2::new(x, y))
}

/// Rotation orbit polygon with slowly drifting radius, winding more than once.
fn orbit_polygon() -> impl Strategy<Value = ClosedPolyCurve> {
    (0.2f64..0.7, 1.1f64..2.4, -0.015f64..0.015, point(0.5)).prop_filter_map(
        "angle hypothesis",
        |(theta, turns, drift, c)| {
            let m = (TAU / theta * turns) as usize;
            let vertices = (1..=m)
                .map(|j| c + Point2::from_polar(1.0 + drift * j as f64, j as f64 * theta))
                .collect();
            let curve = ClosedPolyCurve::new(vertices, TOL).ok()?;
            validate_angle_hypothesis(&curve).is_empty().then_some(curve)
        },
    )
}

fn affine_near_identity() -> impl Strategy<Value = MapSpec> {
    (-0.2f64..0.2, -0.2f64..0.2, -0.2f64..0.2, -0.2f64..0.2, point(0.3)).prop_map(|(a, b, c, d, offset)| {
        MapSpec::Affine {
            matrix: Mat2::new(1.0 + a, b, c, 1.0 + d),
            offset,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn winding_matches_ray_oracle(
        vertices in prop::collection::vec(point(1.0), 3..15),
        q in point(1.2),
        angle in 0.0f64..TAU,
    ) {
        let Ok(curve) = ClosedPolyCurve::new(vertices, TOL) else { return Ok(()) };
        let a = winding_number(&curve, q);
        let b = winding_number_oracle(&curve, q, Point2::from_polar(1.0, angle));
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.value, b.value),
            (a, b) => prop_assert!(a.is_err() && b.is_err()),
        }
    }

    #[test]
    fn reversal_negates_winding(vertices in prop::collection::vec(point(1.0), 3..12), q in point(1.2)) {
        let Ok(curve) = ClosedPolyCurve::new(vertices, TOL) else { return Ok(()) };
        if let (Ok(a), Ok(b)) = (winding_number(&curve, q), winding_number(&curve.reversed(), q)) {
            prop_assert_eq!(a.value, -b.value);
        }
    }

    #[test]
    fn decomposition_loops_are_simple_and_additive(curve in orbit_polygon(), qs in prop::collection::vec(point(2.0), 20)) {
        let report = decompose(&curve, &DecomposeConfig::default()).unwrap();
        prop_assert!(report.all_passed());
        for q in qs {
            let Ok(total) = winding_number_oracle(&curve, q, Point2::new(1.0, 0.0)) else { continue };
            let parts: Option<i64> = report
                .loops
                .iter()
                .map(|l| winding_number_oracle(&l.curve, q, Point2::new(1.0, 0.0)).ok().map(|v| v.value))
                .sum();
            if let Some(sum) = parts {
                prop_assert_eq!(sum, total.value);
            }
        }
        for l in &report.loops {
            let n = l.vertices().len();
            for i in 0..n {
                for j in i + 1..n {
                    prop_assert!(!l.vertices()[i].approx_eq(l.vertices()[j], TOL));
                }
            }
        }
    }

    #[test]
    fn hull_contains_its_points(points in prop::collection::vec(point(5.0), 1..60)) {
        let hull = convex_hull(&points, TOL).unwrap();
        for p in &points {
            prop_assert_ne!(point_in_hull(&hull, *p, 1e-7), HullMembership::Outside);
        }
        for v in &hull.hull_vertices {
            prop_assert!(points.iter().any(|p| p.approx_eq(*v, TOL)));
        }
    }

    #[test]
    fn exp_determinant_is_exp_trace(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0) {
        let m = Mat2::new(a, b, c, d);
        prop_assert!((m.exp().det() - m.trace().exp()).abs() <= 1e-9 * m.trace().exp().max(1.0));
    }

    #[test]
    fn affine_fixed_point_is_found(
        (a, b, c, d) in (-0.2f64..0.2, -0.2f64..0.2, -0.2f64..0.2, -0.2f64..0.2),
        fixed in point(0.45),
    ) {
        let a = Mat2::new(a, b, c, d);
        prop_assume!(a.det().abs() > 1e-3);
        // Offset chosen so that (A - I) fixed = -offset.
        let offset = Point2::ORIGIN - a.apply(fixed);
        let f = DiffeoMap::from_spec(MapSpec::Affine { matrix: Mat2::IDENTITY + a, offset }).unwrap();
        let square = fixloc_core::catalog::centered_unit_square();
        let cert = fixed_point_in_curve(&f, &square, TOL).unwrap();
        prop_assert!(cert.residual < TOL);
        prop_assert!(cert.point.distance(fixed) < 1e-8);
        prop_assert_eq!(cert.degree, a.det().signum() as i64);
    }

    #[test]
    fn capital_point_is_conjugation_invariant(t in affine_near_identity(), n in 6usize..30, c in point(0.4)) {
        let rot = MapSpec::Rotation { center: c, angle: TAU / n as f64 };
        let p = c + Point2::new(0.5, 0.1);
        let cfg = CapitalConfig::default();
        let base = find_capital_point(&DiffeoMap::from_spec(rot.clone()).unwrap(), &[], p, &cfg).unwrap();
        let tm = DiffeoMap::from_spec(t.clone()).unwrap();
        let conj = DiffeoMap::from_spec(MapSpec::Conjugate { map: Box::new(rot), by: Box::new(t) }).unwrap();
        let moved = find_capital_point(&conj, &[], tm.eval(p), &cfg).unwrap();
        prop_assert!(moved.point.distance(tm.eval(base.point)) < TOL);
        prop_assert_eq!(moved.indices[0], base.indices[0]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn conjugated_counterexample_inverts(angle in 0.05f64..1.5, x in point(1.5)) {
        let p = Point2::new(0.5, 0.0);
        let q = Point2::from_polar(0.5, angle);
        prop_assume!((angle / (TAU / 8.0) - (angle / (TAU / 8.0)).round()).abs() > 0.05);
        let (f, g, _) = counterexample_family(8, p, q, None).unwrap();
        prop_assert!(g.inverse(g.eval(x)).unwrap().approx_eq(x, 1e-9));
        prop_assert!(f.inverse(f.eval(x)).unwrap().approx_eq(x, 1e-12));
        prop_assert!(g.displacement(q).norm() < 1e-12);
    }
}
