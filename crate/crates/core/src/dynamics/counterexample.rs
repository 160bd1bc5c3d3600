//! A map close to the identity whose only fixed point in the unit disk lies
//! outside the convex hull of an orbit.
//!
//! `f_n` rotates the disk of radius 1 rigidly by `2 pi / n` and is the
//! identity outside radius 2. Conjugating by a diffeomorphism `psi` that
//! pushes `0` to `q` along a thin tube, and fixes the orbit of `p`, moves the
//! fixed point to `q` while keeping the orbit of `p`.

use serde::{Deserialize, Serialize};

use super::bump::{bump, BUMP_MAX_SLOPE};
use super::map::{BumpRotation, PlanarMap};
use super::{DiffeoMap, DynamicsError, Mat2, MapSpec};
use crate::geom::{convex_hull, ConvexPolygon, Point2};

/// Number of elementary pushes composing `psi`.
const PUSHES: usize = 16;
/// Half-length of each push profile, in units of the push step.
const PUSH_WIDTH: f64 = 3.0;
const TOL: f64 = 1e-9;

/// `psi`: composition of pushes along `e = q / |q|`, each moving the point
/// of the axis at `s_k` forward by `h = |q| / PUSHES`, so that `psi(0) = q`.
/// Supported in `{ -w < s < |q| + w, |t| < width }` in axis coordinates.
pub(crate) struct PushMap {
    e: Point2,
    h: f64,
    w: f64,
    width: f64,
}

impl PushMap {
    pub(crate) fn new(_p: Point2, q: Point2, width: f64) -> Result<Self, DynamicsError> {
        let len = q.norm();
        let e = q
            .normalized()
            .ok_or_else(|| DynamicsError::GeometryConstraintViolated("q must differ from the origin".into()))?;
        if !(width > 0.0 && width.is_finite()) {
            return Err(DynamicsError::InvalidParameter("support radius must be positive".into()));
        }
        let h = len / PUSHES as f64;
        let w = PUSH_WIDTH * h;
        debug_assert!(h * BUMP_MAX_SLOPE < w);
        Ok(PushMap { e, h, w, width })
    }

    fn coords(&self, x: Point2) -> (f64, f64) {
        (x.dot(self.e), x.dot(self.e.perp()))
    }

    fn point(&self, s: f64, t: f64) -> Point2 {
        self.e * s + self.e.perp() * t
    }

    fn push_len(&self) -> f64 {
        self.h * PUSHES as f64
    }

    /// Whether `x` lies in the closed support tube.
    pub(crate) fn in_support(&self, x: Point2) -> bool {
        let (s, t) = self.coords(x);
        t.abs() < self.width && s > -self.w && s < self.push_len() + self.w
    }

    fn center(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    /// Forward displacement of push `k` along `e`, with its partials in `s` and `t`.
    fn push(&self, k: usize, s: f64, t: f64) -> (f64, f64, f64) {
        let (r, dr) = bump((s - self.center(k)) / self.w);
        let (g, dg) = bump(t / self.width);
        (self.h * r * g, self.h * dr * g / self.w, self.h * r * dg / self.width)
    }

    fn unpush(&self, k: usize, s_target: f64, t: f64) -> f64 {
        let g = bump(t / self.width).0;
        if g == 0.0 {
            return s_target;
        }
        // s + push(s) is increasing; the preimage lies in [s_target - h, s_target].
        let f = |s: f64| s + self.push(k, s, t).0 - s_target;
        let (mut lo, mut hi) = (s_target - self.h, s_target);
        let mut s = s_target;
        for _ in 0..200 {
            let v = f(s);
            if v == 0.0 {
                return s;
            }
            if v > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let slope = 1.0 + self.push(k, s, t).1;
            let newton = s - v / slope;
            s = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * s_target.abs().max(self.h) {
                break;
            }
        }
        s
    }
}

impl PlanarMap for PushMap {
    fn eval(&self, x: Point2) -> Point2 {
        if !self.in_support(x) {
            return x;
        }
        let (mut s, t) = self.coords(x);
        for k in 0..PUSHES {
            s += self.push(k, s, t).0;
        }
        self.point(s, t)
    }

    fn jacobian(&self, x: Point2) -> Option<Mat2> {
        if !self.in_support(x) {
            return Some(Mat2::IDENTITY);
        }
        let (mut s, t) = self.coords(x);
        let mut j = Mat2::IDENTITY;
        let eperp = self.e.perp();
        for k in 0..PUSHES {
            let (d, ds, dt) = self.push(k, s, t);
            let grad = self.e * ds + eperp * dt;
            j = (Mat2::IDENTITY + Mat2::outer(self.e, grad)) * j;
            s += d;
        }
        Some(j)
    }

    fn inverse(&self, x: Point2) -> Option<Point2> {
        if !self.in_support(x) {
            return Some(x);
        }
        let (mut s, t) = self.coords(x);
        for k in (0..PUSHES).rev() {
            s = self.unpush(k, s, t);
        }
        Some(self.point(s, t))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub n: u32,
    pub p: Point2,
    pub q: Point2,
    pub support_radius: f64,
    pub orbit: Vec<Point2>,
    /// Largest distance between the orbits of `p` under `f_n` and its conjugate.
    pub orbit_max_deviation: f64,
    pub orbits_coincide: bool,
    pub grid_step: f64,
    pub grid_points: usize,
    /// Points of the grid (plus `q`) in the unit disk moved by less than 1e-9.
    pub near_fixed_points: Vec<Point2>,
    pub unique_fixed_point: bool,
    pub hull: ConvexPolygon,
    /// Distance from `q` to the hull of the conjugated orbit.
    pub hull_margin: f64,
    pub q_outside_hull: bool,
    /// `sup |f_n(x) - x|` over the disk of radius 2.
    pub sup_displacement_d2: f64,
    pub passed: bool,
}

/// Builds `f_n` and `psi o f_n o psi^-1` and certifies that `q` is the only
/// fixed point in the unit disk yet lies outside the hull of the orbit of `p`.
///
/// `support_radius` is the half-width of the tube carrying `psi`; `None`
/// picks half the clearance between the tube axis and the orbit.
pub fn counterexample_family(
    n: u32,
    p: Point2,
    q: Point2,
    support_radius: Option<f64>,
) -> Result<(DiffeoMap, DiffeoMap, CounterexampleReport), DynamicsError> {
    let violated = |msg: String| Err(DynamicsError::GeometryConstraintViolated(msg));
    BumpRotation::new(n)?;
    let (rp, rq) = (p.norm(), q.norm());
    if !(rp > 0.0 && rp < 1.0 && rq < 1.0) {
        return violated(format!("need 0 < |p| = |q| < 1, got |p| = {rp}, |q| = {rq}"));
    }
    if (rp - rq).abs() > TOL {
        return violated(format!("|p| = {rp} differs from |q| = {rq}"));
    }
    let orbit: Vec<Point2> = (0..n).map(|k| p.rotated(std::f64::consts::TAU * k as f64 / n as f64)).collect();
    if orbit.iter().any(|o| o.approx_eq(q, TOL)) {
        return violated(format!("q = {q} lies on the orbit of p"));
    }
    let probe = PushMap::new(p, q, 1.0)?;
    let clearance = orbit
        .iter()
        .map(|&o| {
            let (s, t) = probe.coords(o);
            if s > -probe.w && s < probe.push_len() + probe.w {
                t.abs()
            } else {
                f64::INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min);
    let width = support_radius.unwrap_or_else(|| (0.5 * clearance).min(0.05));
    if width >= clearance {
        return violated(format!("support tube of radius {width} meets the orbit (clearance {clearance})"));
    }
    if rq + probe.w >= 1.0 || width >= 1.0 - rq {
        return violated("support tube leaves the unit disk".into());
    }

    let f = DiffeoMap::from_spec(MapSpec::BumpRotation { n })?;
    let g = DiffeoMap::from_spec(MapSpec::Counterexample {
        n,
        p,
        q,
        support_radius: width,
    })?;

    let mut x = p;
    let mut y = p;
    let mut orbit_max_deviation: f64 = 0.0;
    let mut conj_orbit = Vec::with_capacity(n as usize);
    for _ in 0..n {
        conj_orbit.push(y);
        orbit_max_deviation = orbit_max_deviation.max(x.distance(y));
        x = f.eval(x);
        y = g.eval(y);
    }

    let grid_step = 1e-2;
    let mut grid_points = 0;
    let mut near_fixed_points = Vec::new();
    let mut q_on_grid = false;
    for i in -100i32..=100 {
        for j in -100i32..=100 {
            let z = Point2::new(i as f64 * grid_step, j as f64 * grid_step);
            if z.norm() > 1.0 {
                continue;
            }
            grid_points += 1;
            q_on_grid |= z.approx_eq(q, 1e-12);
            if g.displacement(z).norm() < TOL {
                near_fixed_points.push(z);
            }
        }
    }
    if !q_on_grid && g.displacement(q).norm() < TOL {
        near_fixed_points.push(q);
    }
    let unique_fixed_point = near_fixed_points.len() == 1 && near_fixed_points[0].approx_eq(q, TOL);

    let hull = convex_hull(&conj_orbit, TOL)?;
    let hull_margin = hull.signed_distance(q);

    let top = std::f64::consts::TAU / n as f64;
    let bump_rot = BumpRotation::new(n)?;
    let sup_displacement_d2 = (0..=20_000)
        .map(|k| {
            let r = 2.0 * k as f64 / 20_000.0;
            let phi = bump_rot.phi(r).0.min(top);
            2.0 * r * (0.5 * phi).sin()
        })
        .fold(0.0, f64::max);

    let orbits_coincide = orbit_max_deviation < TOL;
    let q_outside_hull = hull_margin > 0.0;
    let report = CounterexampleReport {
        n,
        p,
        q,
        support_radius: width,
        orbit: conj_orbit,
        orbit_max_deviation,
        orbits_coincide,
        grid_step,
        grid_points,
        near_fixed_points,
        unique_fixed_point,
        hull,
        hull_margin,
        q_outside_hull,
        sup_displacement_d2,
        passed: orbits_coincide && unique_fixed_point && q_outside_hull,
    };
    Ok((f, g, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_moves_origin_to_q() {
        let q = Point2::new(0.3, 0.4);
        let psi = PushMap::new(Point2::new(0.5, 0.0), q, 0.03).unwrap();
        assert!(psi.eval(Point2::ORIGIN).approx_eq(q, 1e-14));
        assert!(psi.inverse(q).unwrap().approx_eq(Point2::ORIGIN, 1e-14));
        let far = Point2::new(0.5, 0.0);
        assert_eq!(psi.eval(far), far);
    }

    #[test]
    fn psi_jacobian_is_invertible() {
        let q = Point2::new(0.3, 0.4);
        let psi = PushMap::new(Point2::new(0.5, 0.0), q, 0.03).unwrap();
        for k in 0..50 {
            let x = q * (k as f64 / 40.0) + q.perp() * 0.02;
            assert!(psi.jacobian(x).unwrap().det() > 0.0);
        }
    }

    #[test]
    fn two_point_orbit() {
        let (_, _, r) = counterexample_family(2, Point2::new(0.5, 0.0), Point2::new(0.0, 0.5), None).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.hull.degenerate);
    }

    #[test]
    fn q_on_orbit_rejected() {
        let p = Point2::new(0.5, 0.0);
        let q = p.rotated(std::f64::consts::FRAC_PI_4);
        assert!(matches!(
            counterexample_family(8, p, q, None),
            Err(DynamicsError::GeometryConstraintViolated(_))
        ));
    }

    #[test]
    fn unequal_radii_rejected() {
        assert!(counterexample_family(8, Point2::new(0.5, 0.0), Point2::new(0.0, 0.4), None).is_err());
    }
}
