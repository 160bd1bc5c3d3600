use serde::{Deserialize, Serialize};

use super::{OrientedSegment, Point2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntersectionKind {
    None,
    Point,
    Overlap,
}

/// Outcome of intersecting two oriented segments.
///
/// For `Point`, `params` holds the parameters of `at` on the first and
/// second segment. For `Overlap`, `overlap` is the shared piece oriented
/// like the first segment and `params` holds its parameter range on the
/// first segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionResult {
    pub kind: IntersectionKind,
    pub at: Option<Point2>,
    pub overlap: Option<OrientedSegment>,
    pub params: Option<(f64, f64)>,
    /// For overlaps: whether both segments run the same way along the shared piece.
    pub same_direction: Option<bool>,
}

impl IntersectionResult {
    const NONE: IntersectionResult = IntersectionResult {
        kind: IntersectionKind::None,
        at: None,
        overlap: None,
        params: None,
        same_direction: None,
    };

    fn point(at: Point2, t: f64, u: f64) -> Self {
        IntersectionResult {
            kind: IntersectionKind::Point,
            at: Some(at),
            overlap: None,
            params: Some((t, u)),
            same_direction: None,
        }
    }

    pub fn is_none(&self) -> bool {
        self.kind == IntersectionKind::None
    }
}

/// Relative threshold on `|sin|` of the angle between two directions below
/// which they are treated as parallel.
const PARALLEL_SIN: f64 = 1e-12;

/// Classifies the intersection of two segments as empty, a single point, or
/// a collinear overlap.
///
/// Endpoints lying within `tolerance` of the other segment are snapped onto
/// it so touching configurations are reported at the exact endpoint.
pub fn segment_intersection(
    s1: &OrientedSegment,
    s2: &OrientedSegment,
    tolerance: f64,
) -> IntersectionResult {
    if !s1.bbox().intersects(&s2.bbox(), tolerance) {
        return IntersectionResult::NONE;
    }
    let d1 = s1.direction();
    let d2 = s2.direction();
    let len1 = d1.norm();
    let len2 = d2.norm();
    let denom = d1.cross(d2);

    if denom.abs() <= PARALLEL_SIN * len1 * len2 {
        return parallel_intersection(s1, s2, tolerance);
    }

    // Endpoint snapping: an endpoint touching the other segment decides the
    // answer, which keeps shared vertices exact.
    let candidates = [
        (s1.start, 0.0, s2, true),
        (s1.end, 1.0, s2, true),
        (s2.start, 0.0, s1, false),
        (s2.end, 1.0, s1, false),
    ];
    let mut best: Option<(f64, IntersectionResult)> = None;
    for (p, own_t, other, first) in candidates {
        let dist = other.distance_to_point(p);
        if dist <= tolerance {
            let other_t = other.project_param(p).clamp(0.0, 1.0);
            let res = if first {
                IntersectionResult::point(p, own_t, other_t)
            } else {
                IntersectionResult::point(p, other_t, own_t)
            };
            if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                best = Some((dist, res));
            }
        }
    }
    if let Some((_, res)) = best {
        return res;
    }

    let w = s2.start - s1.start;
    let t = w.cross(d2) / denom;
    let u = w.cross(d1) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        IntersectionResult::point(s1.point_at(t), t, u)
    } else {
        IntersectionResult::NONE
    }
}

fn parallel_intersection(
    s1: &OrientedSegment,
    s2: &OrientedSegment,
    tolerance: f64,
) -> IntersectionResult {
    let d1 = s1.direction();
    let len1 = d1.norm();
    // Distance of s2's supporting line from s1's.
    let off_line = (s1.side(s2.start) / len1)
        .abs()
        .max((s1.side(s2.end) / len1).abs());
    if off_line > tolerance {
        return IntersectionResult::NONE;
    }
    let t0 = s1.project_param(s2.start);
    let t1 = s1.project_param(s2.end);
    let lo = t0.min(t1).max(0.0);
    let hi = t0.max(t1).min(1.0);
    let slack = tolerance / len1;
    if hi < lo - slack {
        return IntersectionResult::NONE;
    }
    if (hi - lo) * len1 <= tolerance {
        let t = 0.5 * (lo + hi);
        let t = t.clamp(0.0, 1.0);
        // Prefer exact endpoint coordinates when touching at a vertex.
        let at = [s1.start, s1.end, s2.start, s2.end]
            .into_iter()
            .find(|p| p.distance(s1.point_at(t)) <= tolerance)
            .unwrap_or_else(|| s1.point_at(t));
        let u = s2.project_param(at).clamp(0.0, 1.0);
        return IntersectionResult::point(at, s1.project_param(at).clamp(0.0, 1.0), u);
    }
    IntersectionResult {
        kind: IntersectionKind::Overlap,
        at: None,
        overlap: Some(OrientedSegment::new_unchecked(
            s1.point_at(lo),
            s1.point_at(hi),
        )),
        params: Some((lo, hi)),
        same_direction: Some(d1.dot(s2.direction()) > 0.0),
    }
}

/// Angle in `[0, pi]` between the direction vectors of two segments.
pub fn angle_between(s1: &OrientedSegment, s2: &OrientedSegment) -> f64 {
    let d1 = s1.direction();
    let d2 = s2.direction();
    // atan2 form is accurate near 0 and pi where acos loses digits.
    d1.cross(d2).abs().atan2(d1.dot(d2))
}

/// Index pairs `(i, j)`, `i < j`, whose bounding boxes overlap, via an
/// x-sorted sweep. Output is sorted lexicographically.
pub fn candidate_pairs(segments: &[OrientedSegment], tolerance: f64) -> Vec<(usize, usize)> {
    let boxes: Vec<_> = segments.iter().map(|s| s.bbox()).collect();
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by(|&a, &b| boxes[a].min.x.total_cmp(&boxes[b].min.x).then(a.cmp(&b)));
    let mut pairs = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        let max_x = boxes[i].max.x + tolerance;
        for &j in &order[pos + 1..] {
            if boxes[j].min.x > max_x {
                break;
            }
            if boxes[i].intersects(&boxes[j], tolerance) {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn seg(a: (f64, f64), b: (f64, f64)) -> OrientedSegment {
        OrientedSegment::new(a.into(), b.into(), 1e-9).unwrap()
    }

    #[test]
    fn parallel_disjoint_is_none() {
        let r = segment_intersection(&seg((0., 0.), (1., 0.)), &seg((0., 1.), (1., 1.)), 1e-9);
        assert_eq!(r.kind, IntersectionKind::None);
    }

    #[test]
    fn perpendicular_crossing() {
        let r = segment_intersection(&seg((0., 0.), (2., 0.)), &seg((1., -1.), (1., 1.)), 1e-9);
        assert_eq!(r.kind, IntersectionKind::Point);
        let at = r.at.unwrap();
        assert!(at.approx_eq(Point2::new(1.0, 0.0), 1e-12));
        let (t, u) = r.params.unwrap();
        assert!((t - 0.5).abs() < 1e-12 && (u - 0.5).abs() < 1e-12);
    }

    #[test]
    fn collinear_same_direction_overlap() {
        let r = segment_intersection(&seg((0., 0.), (2., 0.)), &seg((1., 0.), (3., 0.)), 1e-9);
        assert_eq!(r.kind, IntersectionKind::Overlap);
        let ov = r.overlap.unwrap();
        assert!(ov.start.approx_eq(Point2::new(1.0, 0.0), 1e-12));
        assert!(ov.end.approx_eq(Point2::new(2.0, 0.0), 1e-12));
        assert_eq!(r.same_direction, Some(true));
    }

    #[test]
    fn collinear_touching_is_point() {
        let r = segment_intersection(&seg((0., 0.), (1., 0.)), &seg((1., 0.), (3., 0.)), 1e-9);
        assert_eq!(r.kind, IntersectionKind::Point);
        assert_eq!(r.at, Some(Point2::new(1.0, 0.0)));
    }

    #[test]
    fn shared_endpoint_is_exact() {
        let r = segment_intersection(&seg((0., 0.), (1., 1.)), &seg((1., 1.), (2., 0.)), 1e-9);
        assert_eq!(r.at, Some(Point2::new(1.0, 1.0)));
        assert_eq!(r.params, Some((1.0, 0.0)));
    }

    #[test]
    fn angle_examples() {
        let e = seg((0., 0.), (1., 0.));
        assert!((angle_between(&e, &seg((0., 0.), (0., 1.))) - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(angle_between(&e, &seg((5., 5.), (6., 5.))), 0.0);
        // arccos(-1/sqrt(2)) = 3 pi / 4
        let expected = (-1.0f64 / 2f64.sqrt()).acos();
        assert!((expected - 3.0 * PI / 4.0).abs() < 1e-15);
        assert!((angle_between(&e, &seg((0., 0.), (-1., 1.))) - expected).abs() < 1e-15);
    }

    #[test]
    fn candidate_pairs_cover_crossings() {
        let segs = vec![
            seg((0., 0.), (2., 2.)),
            seg((2., 0.), (0., 2.)),
            seg((10., 10.), (11., 10.)),
        ];
        assert_eq!(candidate_pairs(&segs, 1e-9), vec![(0, 1)]);
    }
}
