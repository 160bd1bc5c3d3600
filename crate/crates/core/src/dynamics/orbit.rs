use serde::Serialize;

use super::{DiffeoMap, DynamicsError};
use crate::geom::{ClosedPolyCurve, Point2};

/// The closed curve through `f(p), f^2(p), ..., f^m(p)`.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitCurve {
    pub base_point: Point2,
    pub map: DiffeoMap,
    pub length: usize,
    pub curve: ClosedPolyCurve,
}

/// `[f(p), ..., f^count(p)]`.
pub fn orbit(f: &DiffeoMap, p: Point2, count: usize) -> Result<Vec<Point2>, DynamicsError> {
    if count == 0 {
        return Err(DynamicsError::InvalidParameter("orbit length must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(count);
    let mut x = p;
    for step in 1..=count {
        x = f.eval(x);
        if !x.is_finite() {
            return Err(DynamicsError::NonFiniteIterate { step });
        }
        out.push(x);
    }
    Ok(out)
}

pub fn orbit_curve(f: &DiffeoMap, p: Point2, m: usize, tolerance: f64) -> Result<OrbitCurve, DynamicsError> {
    if m < 2 {
        return Err(DynamicsError::InvalidParameter("orbit curve needs m >= 2".into()));
    }
    let displacement = f.displacement(p).norm();
    if displacement <= tolerance {
        return Err(DynamicsError::FixedSeed { displacement });
    }
    let vertices = orbit(f, p, m)?;
    let curve = ClosedPolyCurve::new(vertices, tolerance)
        .map_err(|e| DynamicsError::DegenerateOrbitCurve(e.to_string()))?;
    Ok(OrbitCurve {
        base_point: p,
        map: f.clone(),
        length: m,
        curve,
    })
}

/// All `n <= max_iter` with `|f^n(p) - p| < tol`, ascending.
pub fn return_times(f: &DiffeoMap, p: Point2, tol: f64, max_iter: usize) -> Vec<usize> {
    return_distances(f, p, tol, max_iter).into_iter().map(|(n, _)| n).collect()
}

pub(crate) fn return_distances(f: &DiffeoMap, p: Point2, tol: f64, max_iter: usize) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut x = p;
    for n in 1..=max_iter {
        x = f.eval(x);
        if !x.is_finite() {
            break;
        }
        let d = x.distance(p);
        if d < tol {
            out.push((n, d));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::winding::winding_number;

    #[test]
    fn rotation_orbit_closes() {
        let f = DiffeoMap::rotation(Point2::ORIGIN, TAU / 5.0);
        let o = orbit(&f, Point2::new(1.0, 0.0), 5).unwrap();
        assert!(o[4].approx_eq(Point2::new(1.0, 0.0), 1e-12));
        for (k, x) in o.iter().enumerate() {
            assert!(x.approx_eq(Point2::from_polar(1.0, TAU * (k + 1) as f64 / 5.0), 1e-12));
        }
    }

    #[test]
    fn trivial_orbits() {
        let p = Point2::new(0.2, -0.7);
        assert_eq!(orbit(&DiffeoMap::identity(), p, 3).unwrap(), vec![p; 3]);
        let t = DiffeoMap::translation(Point2::new(1.0, 0.0));
        let o = orbit(&t, Point2::ORIGIN, 3).unwrap();
        assert_eq!(o, vec![Point2::new(1.0, 0.0), Point2::new(2.0, 0.0), Point2::new(3.0, 0.0)]);
    }

    #[test]
    fn pentagon_and_pentagram_indices() {
        let p = Point2::new(1.0, 0.0);
        let c1 = orbit_curve(&DiffeoMap::rotation(Point2::ORIGIN, TAU / 5.0), p, 5, 1e-9).unwrap();
        assert_eq!(winding_number(&c1.curve, Point2::ORIGIN).unwrap().value, 1);
        let c2 = orbit_curve(&DiffeoMap::rotation(Point2::ORIGIN, 2.0 * TAU / 5.0), p, 5, 1e-9).unwrap();
        assert_eq!(winding_number(&c2.curve, Point2::ORIGIN).unwrap().value, 2);
    }

    #[test]
    fn fixed_seed_rejected() {
        assert!(matches!(
            orbit_curve(&DiffeoMap::identity(), Point2::new(1.0, 1.0), 4, 1e-9),
            Err(DynamicsError::FixedSeed { .. })
        ));
    }

    #[test]
    fn return_times_of_periodic_and_wandering_orbits() {
        let f = DiffeoMap::rotation(Point2::ORIGIN, TAU / 5.0);
        assert_eq!(return_times(&f, Point2::new(1.0, 0.0), 1e-9, 20), vec![5, 10, 15, 20]);
        let t = DiffeoMap::translation(Point2::new(0.1, 0.0));
        assert!(return_times(&t, Point2::ORIGIN, 1e-3, 1000).is_empty());
        let golden = TAU * (5f64.sqrt() - 1.0) / 2.0;
        let g = DiffeoMap::rotation(Point2::ORIGIN, golden);
        assert!(!return_times(&g, Point2::new(1.0, 0.0), 0.05, 1000).is_empty());
    }
}
