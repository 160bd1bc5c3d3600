use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::GeomError;

/// Default absolute tolerance for every coincidence predicate.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// A point (or free vector) in the plane.
///
/// Serialized as a two-element array `[x, y]`.
#[derive(Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Builds a point, rejecting NaN and infinite coordinates.
    pub fn try_new(x: f64, y: f64) -> Result<Self, GeomError> {
        if x.is_finite() && y.is_finite() {
            Ok(Point2 { x, y })
        } else {
            Err(GeomError::NonFiniteCoordinate { x, y })
        }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Point2::new(radius * angle.cos(), radius * angle.sin())
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; positive when `other` is
    /// counter-clockwise from `self`.
    #[inline]
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise quarter turn.
    #[inline]
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Option<Point2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(Point2::new(self.x / n, self.y / n))
        } else {
            None
        }
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn approx_eq(self, other: Point2, tolerance: f64) -> bool {
        self.distance(other) <= tolerance
    }

    pub fn rotated(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Lexicographic (x, y) comparison used for deterministic ordering.
    pub fn lex_cmp(&self, other: &Point2) -> std::cmp::Ordering {
        self.x
            .total_cmp(&other.x)
            .then_with(|| self.y.total_cmp(&other.y))
    }
}

impl fmt::Debug for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2 { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2 { x, y }
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, rhs: Point2) -> Point2 {
        rhs * self
    }
}

/// An oriented straight segment `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedSegment {
    pub start: Point2,
    pub end: Point2,
}

impl OrientedSegment {
    /// Builds a segment; endpoints closer than `tolerance` are rejected.
    pub fn new(start: Point2, end: Point2, tolerance: f64) -> Result<Self, GeomError> {
        for p in [start, end] {
            Point2::try_new(p.x, p.y)?;
        }
        if start.distance(end) <= tolerance {
            return Err(GeomError::DegenerateSegment { start, end });
        }
        Ok(OrientedSegment { start, end })
    }

    /// Builds a segment without validation. Callers guarantee distinct endpoints.
    #[inline]
    pub(crate) const fn new_unchecked(start: Point2, end: Point2) -> Self {
        OrientedSegment { start, end }
    }

    #[inline]
    pub fn direction(&self) -> Point2 {
        self.end - self.start
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.direction().norm()
    }

    pub fn point_at(&self, t: f64) -> Point2 {
        self.start.lerp(self.end, t)
    }

    pub fn midpoint(&self) -> Point2 {
        self.point_at(0.5)
    }

    pub fn reversed(&self) -> OrientedSegment {
        OrientedSegment::new_unchecked(self.end, self.start)
    }

    /// Parameter of the orthogonal projection of `p` on the supporting line.
    pub fn project_param(&self, p: Point2) -> f64 {
        let d = self.direction();
        (p - self.start).dot(d) / d.norm_squared()
    }

    pub fn distance_to_point(&self, p: Point2) -> f64 {
        let t = self.project_param(p).clamp(0.0, 1.0);
        self.point_at(t).distance(p)
    }

    /// Signed side of `p`: positive on the left of the oriented segment.
    pub fn side(&self, p: Point2) -> f64 {
        self.direction().cross(p - self.start)
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::from_points([self.start, self.end]).expect("two points")
    }
}

/// Axis-aligned box `[min.x, max.x] x [min.y, max.y]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Point2,
    pub max: Point2,
}

impl BoundingBox {
    pub fn new(min: Point2, max: Point2) -> Self {
        BoundingBox {
            min: Point2::new(min.x.min(max.x), min.y.min(max.y)),
            max: Point2::new(min.x.max(max.x), min.y.max(max.y)),
        }
    }

    /// Square `[-half, half]^2` centered at `center`.
    pub fn centered(center: Point2, half: f64) -> Self {
        BoundingBox::new(
            Point2::new(center.x - half, center.y - half),
            Point2::new(center.x + half, center.y + half),
        )
    }

    pub fn from_points<I: IntoIterator<Item = Point2>>(points: I) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let (mut min, mut max) = (first, first);
        for p in iter {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Some(BoundingBox { min, max })
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    pub fn center(&self) -> Point2 {
        self.min.lerp(self.max, 0.5)
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn expanded(&self, margin: f64) -> Self {
        BoundingBox {
            min: Point2::new(self.min.x - margin, self.min.y - margin),
            max: Point2::new(self.max.x + margin, self.max.y + margin),
        }
    }

    pub fn intersects(&self, other: &BoundingBox, tolerance: f64) -> bool {
        self.min.x <= other.max.x + tolerance
            && other.min.x <= self.max.x + tolerance
            && self.min.y <= other.max.y + tolerance
            && other.min.y <= self.max.y + tolerance
    }

    /// Counter-clockwise corner list starting at `min`.
    pub fn corners(&self) -> [Point2; 4] {
        [
            self.min,
            Point2::new(self.max.x, self.min.y),
            self.max,
            Point2::new(self.min.x, self.max.y),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(Point2::try_new(f64::NAN, 0.0).is_err());
        assert!(Point2::try_new(0.0, f64::INFINITY).is_err());
        assert!(Point2::try_new(1.0, 2.0).is_ok());
    }

    #[test]
    fn degenerate_segment_rejected() {
        let p = Point2::new(1.0, 1.0);
        assert!(matches!(
            OrientedSegment::new(p, p, DEFAULT_TOLERANCE),
            Err(GeomError::DegenerateSegment { .. })
        ));
    }

    #[test]
    fn side_sign_is_left_positive() {
        let s = OrientedSegment::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), 1e-9).unwrap();
        assert!(s.side(Point2::new(0.5, 1.0)) > 0.0);
        assert!(s.side(Point2::new(0.5, -1.0)) < 0.0);
    }

    #[test]
    fn serializes_as_pair() {
        let json = serde_json::to_string(&Point2::new(1.5, -2.0)).unwrap();
        assert_eq!(json, "[1.5,-2.0]");
        let back: Point2 = serde_json::from_str("[3, 4]").unwrap();
        assert_eq!(back, Point2::new(3.0, 4.0));
    }
}
