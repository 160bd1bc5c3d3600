//! Curve preprocessing: angle-hypothesis validation, splitting at
//! intersection points, and separation of multiply covered segments.
//!
//! The `*_tracked` variants carry, for every output segment, the index of
//! the input segment that contains it and, for separation detours, the
//! geometry needed to retract the detour later.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{
    angle_between, build_closed_curve, candidate_pairs, segment_intersection, ClosedPolyCurve,
    GeomError, IntersectionKind, OrientedSegment, Point2,
};

/// A pair of intersecting composing segments meeting at an angle `>= pi/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleViolation {
    pub first: usize,
    pub second: usize,
    pub angle: f64,
    pub at: Option<Point2>,
}

/// Reports every intersecting pair of composing segments whose angle is not
/// below `pi/2`.
///
/// Pairs that only touch at a point which is an endpoint of both segments
/// (a shared vertex) are not crossings and are not checked.
pub fn validate_angle_hypothesis(curve: &ClosedPolyCurve) -> Vec<AngleViolation> {
    let tol = curve.tolerance();
    let segs: Vec<_> = curve.segments().collect();
    let mut out = Vec::new();
    for (i, j) in candidate_pairs(&segs, tol) {
        let r = segment_intersection(&segs[i], &segs[j], tol);
        match r.kind {
            IntersectionKind::None => continue,
            IntersectionKind::Point => {
                let at = r.at.expect("point");
                if is_endpoint(&segs[i], at, tol) && is_endpoint(&segs[j], at, tol) {
                    continue;
                }
                let angle = angle_between(&segs[i], &segs[j]);
                if angle >= FRAC_PI_2 {
                    out.push(AngleViolation {
                        first: i,
                        second: j,
                        angle,
                        at: Some(at),
                    });
                }
            }
            IntersectionKind::Overlap => {
                let angle = angle_between(&segs[i], &segs[j]);
                if angle >= FRAC_PI_2 {
                    out.push(AngleViolation {
                        first: i,
                        second: j,
                        angle,
                        at: r.overlap.map(|o| o.midpoint()),
                    });
                }
            }
        }
    }
    out
}

fn is_endpoint(s: &OrientedSegment, p: Point2, tol: f64) -> bool {
    s.start.approx_eq(p, tol) || s.end.approx_eq(p, tol)
}

/// Which half of a separation detour `[a, lambda] U [lambda, b]` a segment is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetourHalf {
    ToApex,
    FromApex,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detour {
    /// Id of the multiply covered piece `[a, b]` this detour replaces.
    pub group: usize,
    /// 1-based rank `l`; detour `l` lies to the left of detour `l + 1`.
    pub rank: usize,
    pub a: Point2,
    pub b: Point2,
    pub apex: Point2,
    pub half: DetourHalf,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentOrigin {
    /// Index of the segment of the original curve containing this piece.
    pub parent: usize,
    pub detour: Option<Detour>,
}

/// A working curve whose segments remember where they came from.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackedCurve {
    pub vertices: Vec<Point2>,
    pub origins: Vec<SegmentOrigin>,
    pub tolerance: f64,
}

impl TrackedCurve {
    pub fn from_curve(curve: &ClosedPolyCurve) -> Self {
        TrackedCurve {
            vertices: curve.vertices().to_vec(),
            origins: (0..curve.len())
                .map(|parent| SegmentOrigin {
                    parent,
                    detour: None,
                })
                .collect(),
            tolerance: curve.tolerance(),
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn segment(&self, i: usize) -> OrientedSegment {
        let n = self.vertices.len();
        OrientedSegment::new_unchecked(self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn segments(&self) -> Vec<OrientedSegment> {
        (0..self.len()).map(|i| self.segment(i)).collect()
    }

    pub fn to_curve(&self) -> Result<ClosedPolyCurve, GeomError> {
        build_closed_curve(self.vertices.clone(), self.tolerance)
    }

    pub fn has_detours(&self) -> bool {
        self.origins.iter().any(|o| o.detour.is_some())
    }
}

/// Snaps nearby points onto a single representative, so that the same
/// geometric vertex always has bit-identical coordinates.
pub(crate) struct VertexPool {
    cell: f64,
    tolerance: f64,
    grid: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<Point2>,
}

impl VertexPool {
    pub(crate) fn new(tolerance: f64) -> Self {
        VertexPool {
            cell: (tolerance * 4.0).max(f64::MIN_POSITIVE),
            tolerance,
            grid: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn key(&self, p: Point2) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    pub(crate) fn find(&self, p: Point2) -> Option<usize> {
        let (kx, ky) = self.key(p);
        let mut best: Option<(f64, usize)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.grid.get(&(kx + dx, ky + dy)) {
                    for &id in ids {
                        let d = self.points[id].distance(p);
                        if d <= self.tolerance && best.is_none_or(|(bd, bid)| d < bd || (d == bd && id < bid)) {
                            best = Some((d, id));
                        }
                    }
                }
            }
        }
        best.map(|(_, id)| id)
    }

    /// Returns the id of the representative for `p`, inserting it if new.
    pub(crate) fn intern(&mut self, p: Point2) -> usize {
        if let Some(id) = self.find(p) {
            return id;
        }
        let id = self.points.len();
        self.points.push(p);
        let key = self.key(p);
        self.grid.entry(key).or_default().push(id);
        id
    }

    pub(crate) fn snap(&mut self, p: Point2) -> Point2 {
        let id = self.intern(p);
        self.points[id]
    }

    pub(crate) fn point(&self, id: usize) -> Point2 {
        self.points[id]
    }
}

/// Splits segments at every interior intersection point so that composing
/// segments meet only at shared endpoints. The traced point set, order and
/// orientation are unchanged.
pub fn subdivide_at_intersections(curve: &ClosedPolyCurve) -> Result<ClosedPolyCurve, GeomError> {
    subdivide_tracked(&TrackedCurve::from_curve(curve))?.to_curve()
}

pub fn subdivide_tracked(curve: &TrackedCurve) -> Result<TrackedCurve, GeomError> {
    let tol = curve.tolerance;
    let segs = curve.segments();
    let mut pool = VertexPool::new(tol);
    for &v in &curve.vertices {
        pool.intern(v);
    }
    let mut splits: Vec<Vec<(f64, Point2)>> = vec![Vec::new(); segs.len()];
    for (i, j) in candidate_pairs(&segs, tol) {
        let r = segment_intersection(&segs[i], &segs[j], tol);
        match r.kind {
            IntersectionKind::None => {}
            IntersectionKind::Overlap => {
                return Err(GeomError::OverlapPresent {
                    first: i,
                    second: j,
                })
            }
            IntersectionKind::Point => {
                let at = pool.snap(r.at.expect("point"));
                for &k in &[i, j] {
                    let s = &segs[k];
                    if !is_endpoint(s, at, tol) {
                        splits[k].push((s.project_param(at), at));
                    }
                }
            }
        }
    }
    Ok(rebuild_with_splits(curve, &segs, splits))
}

fn rebuild_with_splits(
    curve: &TrackedCurve,
    segs: &[OrientedSegment],
    mut splits: Vec<Vec<(f64, Point2)>>,
) -> TrackedCurve {
    let tol = curve.tolerance;
    let mut vertices = Vec::with_capacity(curve.len());
    let mut origins = Vec::with_capacity(curve.len());
    for (k, s) in segs.iter().enumerate() {
        let list = &mut splits[k];
        list.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.lex_cmp(&b.1)));
        list.dedup_by(|a, b| a.1.approx_eq(b.1, tol));
        vertices.push(s.start);
        origins.push(curve.origins[k]);
        let mut last = s.start;
        for &(_, p) in list.iter() {
            if p.approx_eq(last, tol) || p.approx_eq(s.end, tol) {
                continue;
            }
            vertices.push(p);
            origins.push(curve.origins[k]);
            last = p;
        }
    }
    TrackedCurve {
        vertices,
        origins,
        tolerance: tol,
    }
}

/// Replaces every segment covered `k >= 2` times by `k` disjoint two-segment
/// detours through apexes placed on the left of the segment.
///
/// Apex `l` sits on the perpendicular bisector at distance
/// `(k + 1 - l) * separation`, so detour `l` is left of detour `l + 1`.
pub fn separate_overlaps(curve: &ClosedPolyCurve, separation: f64) -> Result<ClosedPolyCurve, GeomError> {
    separate_overlaps_tracked(&TrackedCurve::from_curve(curve), separation)?.to_curve()
}

pub fn separate_overlaps_tracked(
    curve: &TrackedCurve,
    separation: f64,
) -> Result<TrackedCurve, GeomError> {
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(GeomError::InvalidSeparation(separation));
    }
    let tol = curve.tolerance;
    if overlap_pairs(curve).is_empty() {
        return Ok(curve.clone());
    }

    // Split overlapping segments until overlaps are between identical pieces.
    let mut work = curve.clone();
    for _ in 0..4 {
        let pairs = overlap_pairs(&work);
        if pairs.iter().all(|&(i, j)| same_piece(&work.segment(i), &work.segment(j), tol)) {
            break;
        }
        work = refine_overlaps(&work, &pairs);
    }

    let pairs = overlap_pairs(&work);
    let n = work.len();
    let mut group_of: Vec<Option<usize>> = vec![None; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &(i, j) in &pairs {
        let (si, sj) = (work.segment(i), work.segment(j));
        if si.direction().dot(sj.direction()) <= 0.0 {
            return Err(GeomError::OppositeOverlap { first: i, second: j });
        }
        if !same_piece(&si, &sj, tol) {
            return Err(GeomError::OverlapUnresolved { first: i, second: j });
        }
        match (group_of[i], group_of[j]) {
            (Some(g), None) => {
                group_of[j] = Some(g);
                groups[g].push(j);
            }
            (None, Some(g)) => {
                group_of[i] = Some(g);
                groups[g].push(i);
            }
            (None, None) => {
                let g = groups.len();
                groups.push(vec![i, j]);
                group_of[i] = Some(g);
                group_of[j] = Some(g);
            }
            (Some(_), Some(_)) => {}
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }

    let mut apex_of: Vec<Option<(usize, usize, Point2)>> = vec![None; n];
    let mut fans: Vec<(Point2, Point2, Point2, Vec<Point2>)> = Vec::new();
    for (gid, members) in groups.iter().enumerate() {
        let s = work.segment(members[0]);
        let k = members.len();
        let left = s.direction().perp().normalized().expect("non-degenerate");
        let mid = s.midpoint();
        let mut apexes = Vec::with_capacity(k);
        for (idx, &m) in members.iter().enumerate() {
            let rank = idx + 1;
            let offset = (k + 1 - rank) as f64 * separation;
            apex_of[m] = Some((gid, rank, mid + left * offset));
            apexes.push(mid + left * offset);
        }
        fans.push((s.start, s.end, mid + left * (k as f64 * separation), apexes));
    }

    let mut vertices = Vec::with_capacity(n + pairs.len() * 2);
    let mut origins = Vec::with_capacity(n + pairs.len() * 2);
    for i in 0..n {
        let s = work.segment(i);
        let origin = work.origins[i];
        match apex_of[i] {
            None => {
                vertices.push(s.start);
                origins.push(origin);
            }
            Some((group, rank, apex)) => {
                let detour = |half| Detour {
                    group,
                    rank,
                    a: s.start,
                    b: s.end,
                    apex,
                    half,
                };
                vertices.push(s.start);
                origins.push(SegmentOrigin {
                    parent: origin.parent,
                    detour: Some(detour(DetourHalf::ToApex)),
                });
                vertices.push(apex);
                origins.push(SegmentOrigin {
                    parent: origin.parent,
                    detour: Some(detour(DetourHalf::FromApex)),
                });
            }
        }
    }
    let out = TrackedCurve {
        vertices,
        origins,
        tolerance: tol,
    };
    check_detours(&out, &fans, separation)?;
    Ok(out)
}

fn same_piece(a: &OrientedSegment, b: &OrientedSegment, tol: f64) -> bool {
    a.start.approx_eq(b.start, tol) && a.end.approx_eq(b.end, tol)
}

fn overlap_pairs(curve: &TrackedCurve) -> Vec<(usize, usize)> {
    let segs = curve.segments();
    candidate_pairs(&segs, curve.tolerance)
        .into_iter()
        .filter(|&(i, j)| {
            segment_intersection(&segs[i], &segs[j], curve.tolerance).kind == IntersectionKind::Overlap
        })
        .collect()
}

fn refine_overlaps(curve: &TrackedCurve, pairs: &[(usize, usize)]) -> TrackedCurve {
    let tol = curve.tolerance;
    let segs = curve.segments();
    let mut pool = VertexPool::new(tol);
    for &v in &curve.vertices {
        pool.intern(v);
    }
    let mut involved = vec![false; segs.len()];
    let mut splits: Vec<Vec<(f64, Point2)>> = vec![Vec::new(); segs.len()];
    for &(i, j) in pairs {
        involved[i] = true;
        involved[j] = true;
        for (a, b) in [(i, j), (j, i)] {
            for p in [segs[b].start, segs[b].end] {
                if segs[a].distance_to_point(p) <= tol && !is_endpoint(&segs[a], p, tol) {
                    let p = pool.snap(p);
                    splits[a].push((segs[a].project_param(p), p));
                }
            }
        }
    }
    // Transversal crossings through an overlapped piece become piece ends,
    // so detours never have to cross another strand.
    for (i, j) in candidate_pairs(&segs, tol) {
        if !(involved[i] || involved[j]) {
            continue;
        }
        let r = segment_intersection(&segs[i], &segs[j], tol);
        if r.kind == IntersectionKind::Point {
            let at = pool.snap(r.at.expect("point"));
            for k in [i, j] {
                if involved[k] && !is_endpoint(&segs[k], at, tol) {
                    splits[k].push((segs[k].project_param(at), at));
                }
            }
        }
    }
    rebuild_with_splits(curve, &segs, splits)
}

fn check_detours(
    curve: &TrackedCurve,
    fans: &[(Point2, Point2, Point2, Vec<Point2>)],
    separation: f64,
) -> Result<(), GeomError> {
    let tol = curve.tolerance;
    let segs = curve.segments();
    let n = segs.len();
    for (i, j) in candidate_pairs(&segs, tol) {
        let (di, dj) = (curve.origins[i].detour, curve.origins[j].detour);
        if di.is_none() && dj.is_none() {
            continue;
        }
        let r = segment_intersection(&segs[i], &segs[j], tol);
        let ok = match r.kind {
            IntersectionKind::None => true,
            IntersectionKind::Overlap => false,
            IntersectionKind::Point => {
                let at = r.at.expect("point");
                let consecutive = (i + 1) % n == j || (j + 1) % n == i;
                let allowed = |d: Option<Detour>| match d {
                    Some(d) => at.approx_eq(d.a, tol) || at.approx_eq(d.b, tol),
                    None => true,
                };
                (consecutive && is_endpoint(&segs[i], at, tol) && is_endpoint(&segs[j], at, tol))
                    || (allowed(di) && allowed(dj))
            }
        };
        if !ok {
            return Err(GeomError::SeparationTooLarge { separation });
        }
    }
    // No curve vertex may sit inside a fan region.
    for (a, b, apex, own_apexes) in fans {
        let (a, b, apex) = (*a, *b, *apex);
        let tri = [a, b, apex];
        for &v in &curve.vertices {
            if v.approx_eq(a, tol) || v.approx_eq(b, tol) {
                continue;
            }
            if own_apexes.iter().any(|x| x.approx_eq(v, tol)) {
                continue;
            }
            if strictly_inside_triangle(tri, v, tol) {
                return Err(GeomError::SeparationTooLarge { separation });
            }
        }
    }
    Ok(())
}

fn strictly_inside_triangle(tri: [Point2; 3], p: Point2, tol: f64) -> bool {
    let [a, b, c] = tri;
    let sign = (b - a).cross(c - a).signum();
    [(a, b), (b, c), (c, a)].iter().all(|&(u, v)| {
        let e = v - u;
        sign * e.cross(p - u) / e.norm() > tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::ClosedPolyCurve;

    fn curve(coords: &[(f64, f64)]) -> ClosedPolyCurve {
        ClosedPolyCurve::from_coords(coords, 1e-9).unwrap()
    }

    fn triangle_twice() -> ClosedPolyCurve {
        curve(&[(-1., 0.), (1., 0.), (0., 2.), (-1., 0.), (1., 0.), (0., 2.)])
    }

    #[test]
    fn angle_hypothesis_examples() {
        assert!(validate_angle_hypothesis(&triangle_twice()).is_empty());
        let square = curve(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]);
        assert!(validate_angle_hypothesis(&square).is_empty());
        let bowtie = curve(&[(0., 0.), (2., 2.), (2., 0.), (0., 2.)]);
        let v = validate_angle_hypothesis(&bowtie);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].first, v[0].second), (0, 2));
        assert!((v[0].angle - FRAC_PI_2).abs() < 1e-15);
        assert!(v[0].at.unwrap().approx_eq(Point2::new(1.0, 1.0), 1e-12));
    }

    #[test]
    fn subdivide_simple_triangle_unchanged() {
        let t = curve(&[(-1., 0.), (1., 0.), (0., 2.)]);
        assert_eq!(subdivide_at_intersections(&t).unwrap(), t);
    }

    #[test]
    fn subdivide_bowtie() {
        let b = curve(&[(0., 0.), (2., 2.), (2., 0.), (0., 2.)]);
        let s = subdivide_at_intersections(&b).unwrap();
        assert_eq!(s.len(), 6);
        let hits = s.vertices().iter().filter(|v| **v == Point2::new(1.0, 1.0)).count();
        assert_eq!(hits, 2);
    }

    #[test]
    fn subdivide_rejects_overlap() {
        assert!(matches!(
            subdivide_at_intersections(&triangle_twice()),
            Err(GeomError::OverlapPresent { .. })
        ));
    }

    #[test]
    fn separate_leaves_simple_square() {
        let sq = curve(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]);
        assert_eq!(separate_overlaps(&sq, 0.01).unwrap(), sq);
    }

    #[test]
    fn separate_triangle_twice() {
        let sep = separate_overlaps(&triangle_twice(), 0.01).unwrap();
        // Every edge of both passes became a two-segment detour.
        assert_eq!(sep.len(), 12);
        let segs: Vec<_> = sep.segments().collect();
        for (i, j) in candidate_pairs(&segs, 1e-9) {
            let r = segment_intersection(&segs[i], &segs[j], 1e-9);
            assert_ne!(r.kind, IntersectionKind::Overlap, "pair {i},{j}");
        }
        // Apexes of the bottom edge: left of (-1,0)->(1,0) is +y.
        let apexes: Vec<_> = sep.vertices().iter().filter(|v| v.x == 0.0 && v.y > 0.0 && v.y < 1.0).collect();
        assert_eq!(apexes.len(), 2);
    }

    #[test]
    fn separate_threefold_segment() {
        // The bottom edge of a triangle traversed three times.
        let mut coords = Vec::new();
        for _ in 0..3 {
            coords.extend_from_slice(&[(-1., 0.), (1., 0.), (0., 2.)]);
        }
        let c = curve(&coords);
        let tracked = separate_overlaps_tracked(&TrackedCurve::from_curve(&c), 0.01).unwrap();
        let bottom: Vec<_> = tracked
            .origins
            .iter()
            .filter_map(|o| o.detour)
            .filter(|d| d.a == Point2::new(-1.0, 0.0) && d.b == Point2::new(1.0, 0.0))
            .collect();
        // k = 3 passes give 2k = 6 sub-segments through apexes l = 1, 2, 3.
        assert_eq!(bottom.len(), 6);
        let mut ranks: Vec<_> = bottom.iter().map(|d| (d.rank, d.apex.y)).collect();
        ranks.sort_by_key(|a| a.0);
        ranks.dedup_by(|a, b| a.0 == b.0);
        assert_eq!(ranks.len(), 3);
        // Rank 1 is leftmost (furthest on the +y side).
        assert!(ranks[0].1 > ranks[1].1 && ranks[1].1 > ranks[2].1);
    }

    #[test]
    fn partial_overlap_is_split_first() {
        // Two passes sharing only part of the bottom edge.
        let c = curve(&[(-1., 0.), (1., 0.), (0., 2.), (-0.5, 0.), (2., 0.), (0., 3.)]);
        let out = separate_overlaps(&c, 0.005).unwrap();
        assert!(subdivide_at_intersections(&out).is_ok());
    }

    #[test]
    fn too_large_separation_reported() {
        let c = triangle_twice();
        assert!(matches!(
            separate_overlaps(&c, 5.0),
            Err(GeomError::SeparationTooLarge { .. })
        ));
    }
}
