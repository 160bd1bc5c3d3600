use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::geom::Point2;

/// A real 2x2 matrix `[[a, b], [c, d]]`, serialized row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl From<[[f64; 2]; 2]> for Mat2 {
    fn from([[a, b], [c, d]]: [[f64; 2]; 2]) -> Self {
        Mat2 { a, b, c, d }
    }
}

impl From<Mat2> for [[f64; 2]; 2] {
    fn from(m: Mat2) -> Self {
        [[m.a, m.b], [m.c, m.d]]
    }
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    pub fn scaling(factor: f64) -> Self {
        Mat2::new(factor, 0.0, 0.0, factor)
    }

    /// Matrix with the given columns.
    pub fn from_columns(c0: Point2, c1: Point2) -> Self {
        Mat2::new(c0.x, c1.x, c0.y, c1.y)
    }

    /// Outer product `u v^T`.
    pub fn outer(u: Point2, v: Point2) -> Self {
        Mat2::new(u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y)
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        Point2::new(self.a * p.x + self.b * p.y, self.c * p.x + self.d * p.y)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        let s = self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d;
        let det = self.det();
        let disc = (s * s - 4.0 * det * det).max(0.0).sqrt();
        (0.5 * (s + disc)).max(0.0).sqrt()
    }

    /// Matrix exponential, in closed form for 2x2 matrices.
    pub fn exp(&self) -> Self {
        let t = 0.5 * self.trace();
        let n = *self - Mat2::scaling(t);
        // n is traceless, so n^2 = q I.
        let q = -n.det();
        let (ch, sh) = if q > 0.0 {
            let r = q.sqrt();
            (r.cosh(), r.sinh() / r)
        } else if q < 0.0 {
            let r = (-q).sqrt();
            (r.cos(), r.sin() / r)
        } else {
            (1.0, 1.0)
        };
        (Mat2::scaling(ch) + n * sh) * t.exp()
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let m = *self - *other;
        m.a.abs().max(m.b.abs()).max(m.c.abs()).max(m.d.abs())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn op_norm_of_rotation_minus_identity() {
        let theta = 0.3;
        let m = Mat2::rotation(theta) - Mat2::IDENTITY;
        assert!((m.op_norm() - 2.0 * (theta / 2.0).sin()).abs() < 1e-15);
        assert!((Mat2::new(3.0, 0.0, 0.0, -5.0).op_norm() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn exp_matches_series() {
        let series = |m: Mat2| {
            let mut term = Mat2::IDENTITY;
            let mut sum = Mat2::IDENTITY;
            for k in 1..40 {
                term = term * m * (1.0 / k as f64);
                sum = sum + term;
            }
            sum
        };
        for m in [
            Mat2::new(0.0, -1.0, 1.0, 0.0),
            Mat2::new(-0.3, -2.0, 2.0, -0.3),
            Mat2::new(0.5, 1.0, 0.2, -0.1),
            Mat2::new(1.0, 1.0, 0.0, 1.0),
        ] {
            assert!(m.exp().max_abs_diff(&series(m)) < 1e-12, "{m:?}");
        }
        let r = Mat2::new(0.0, -PI / 2.0, PI / 2.0, 0.0).exp();
        assert!(r.max_abs_diff(&Mat2::rotation(PI / 2.0)) < 1e-15);
    }

    #[test]
    fn inverse_roundtrip() {
        let m = Mat2::new(2.0, 1.0, 1.0, 3.0);
        assert!((m * m.inverse().unwrap()).max_abs_diff(&Mat2::IDENTITY) < 1e-15);
        assert!(Mat2::new(1.0, 2.0, 2.0, 4.0).inverse().is_none());
    }
}
