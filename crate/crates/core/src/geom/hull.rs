use serde::{Deserialize, Serialize};

use super::{GeomError, OrientedSegment, Point2};

/// Convex hull as a counter-clockwise vertex list with no three collinear
/// vertices.
///
/// Collinear or single-point inputs give a degenerate hull with one or two
/// vertices; it is kept (flagged) rather than rejected, and behaves as the
/// corresponding point or segment in membership queries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    pub hull_vertices: Vec<Point2>,
    pub degenerate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HullMembership {
    Inside,
    Boundary,
    Outside,
}

/// Andrew's monotone chain. Points within `tolerance` of the running chain
/// line are dropped so the output is strictly convex.
pub fn convex_hull(points: &[Point2], tolerance: f64) -> Result<ConvexPolygon, GeomError> {
    if points.is_empty() {
        return Err(GeomError::EmptyInput);
    }
    for p in points {
        Point2::try_new(p.x, p.y)?;
    }
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts.dedup_by(|a, b| a.approx_eq(*b, tolerance));
    if pts.len() == 1 {
        return Ok(ConvexPolygon {
            hull_vertices: pts,
            degenerate: true,
        });
    }

    // Keep a turn only if it is clearly to the left: the distance of the
    // new point from the chain's last edge must exceed the tolerance.
    let keeps_left_turn = |o: Point2, a: Point2, b: Point2| {
        let edge = a - o;
        let len = edge.norm();
        len > 0.0 && edge.cross(b - o) / len > tolerance
    };

    let mut lower: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && !keeps_left_turn(lower[lower.len() - 2], lower[lower.len() - 1], p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && !keeps_left_turn(upper[upper.len() - 2], upper[upper.len() - 1], p) {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);

    if lower.len() <= 2 {
        // Collinear input: keep the two extreme points.
        let first = pts[0];
        let last = *pts.last().unwrap();
        return Ok(ConvexPolygon {
            hull_vertices: vec![first, last],
            degenerate: true,
        });
    }
    Ok(ConvexPolygon {
        hull_vertices: lower,
        degenerate: false,
    })
}

impl ConvexPolygon {
    pub fn len(&self) -> usize {
        self.hull_vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hull_vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = OrientedSegment> + '_ {
        let n = self.hull_vertices.len();
        let count = if n < 2 { 0 } else if n == 2 { 1 } else { n };
        (0..count).map(move |i| {
            OrientedSegment::new_unchecked(self.hull_vertices[i], self.hull_vertices[(i + 1) % n])
        })
    }

    /// Signed distance: negative inside, positive outside, zero on the boundary.
    pub fn signed_distance(&self, q: Point2) -> f64 {
        let boundary = match self.hull_vertices.len() {
            0 => return f64::INFINITY,
            1 => return self.hull_vertices[0].distance(q),
            _ => self
                .edges()
                .map(|e| e.distance_to_point(q))
                .fold(f64::INFINITY, f64::min),
        };
        if self.degenerate {
            return boundary;
        }
        let inside = self.edges().all(|e| e.side(q) >= 0.0);
        if inside {
            -boundary
        } else {
            boundary
        }
    }

    pub fn area(&self) -> f64 {
        let n = self.hull_vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.hull_vertices[i].cross(self.hull_vertices[(i + 1) % n]);
        }
        0.5 * acc
    }
}

/// Classifies `q` against the hull with a boundary band of width `tolerance`.
pub fn point_in_hull(hull: &ConvexPolygon, q: Point2, tolerance: f64) -> HullMembership {
    let d = hull.signed_distance(q);
    if d.abs() <= tolerance {
        HullMembership::Boundary
    } else if d < 0.0 {
        HullMembership::Inside
    } else {
        HullMembership::Outside
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn pentagon() -> ConvexPolygon {
        let pts: Vec<_> = (0..5).map(|k| Point2::from_polar(1.0, 2.0 * PI * k as f64 / 5.0)).collect();
        convex_hull(&pts, 1e-9).unwrap()
    }

    #[test]
    fn interior_point_dropped() {
        let h = convex_hull(&[p(0., 0.), p(1., 0.), p(0., 1.), p(0.2, 0.2)], 1e-9).unwrap();
        assert_eq!(h.hull_vertices, vec![p(0., 0.), p(1., 0.), p(0., 1.)]);
        assert!(!h.degenerate);
    }

    #[test]
    fn single_point_is_degenerate() {
        let h = convex_hull(&[p(0., 0.)], 1e-9).unwrap();
        assert!(h.degenerate);
        assert_eq!(h.hull_vertices, vec![p(0., 0.)]);
    }

    #[test]
    fn empty_rejected() {
        assert_eq!(convex_hull(&[], 1e-9), Err(GeomError::EmptyInput));
    }

    #[test]
    fn collinear_is_segment() {
        let h = convex_hull(&[p(0., 0.), p(2., 2.), p(1., 1.)], 1e-9).unwrap();
        assert!(h.degenerate);
        assert_eq!(h.hull_vertices, vec![p(0., 0.), p(2., 2.)]);
        assert_eq!(point_in_hull(&h, p(1.0, 1.0), 1e-9), HullMembership::Boundary);
        assert_eq!(point_in_hull(&h, p(1.0, 0.0), 1e-9), HullMembership::Outside);
    }

    #[test]
    fn rotation_orbit_gives_regular_pentagon() {
        let h = pentagon();
        assert_eq!(h.len(), 5);
        for v in &h.hull_vertices {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        // Area of a regular pentagon of circumradius 1: (5/2) sin(2 pi / 5).
        let expected = 2.5 * (2.0 * PI / 5.0).sin();
        assert!((h.area() - expected).abs() < 1e-12);
    }

    #[test]
    fn membership_examples() {
        let h = pentagon();
        assert_eq!(point_in_hull(&h, p(0., 0.), 1e-9), HullMembership::Inside);
        assert_eq!(point_in_hull(&h, p(10., 0.), 1e-9), HullMembership::Outside);
        let tri = convex_hull(&[p(-1., 0.), p(1., 0.), p(0., 2.)], 1e-9).unwrap();
        assert_eq!(point_in_hull(&tri, p(0., 0.), 1e-9), HullMembership::Boundary);
    }
}
