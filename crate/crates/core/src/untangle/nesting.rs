use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SimpleLoop, UntangleError};
use crate::geom::{ClosedPolyCurve, Point2};
use crate::winding::winding_number;

/// Cap on the number of maximal chains enumerated.
const MAX_CHAINS: usize = 10_000;

/// Relation between the closed disks bounded by two loops `a` and `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiskRelation {
    Disjoint,
    /// disk(a) is strictly inside disk(b).
    Inside,
    /// disk(b) is strictly inside disk(a).
    Contains,
    Equal,
    Crossing,
}

/// The containment order on loop disks. `strictly_inside` holds pairs
/// `(inner, outer)`; `equal` holds pairs `(i, j)`, `i < j`, bounding the same disk.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NestingRelation {
    pub strictly_inside: Vec<(usize, usize)>,
    pub equal: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    In,
    Out,
    On,
}

fn side_of(lp: &SimpleLoop, x: Point2) -> Side {
    let c = &lp.curve;
    if c.distance_to_point(x) <= 10.0 * c.tolerance() {
        return Side::On;
    }
    match winding_number(c, x) {
        Ok(v) if v.value != 0 => Side::In,
        Ok(_) => Side::Out,
        Err(_) => Side::On,
    }
}

fn boundary_samples(lp: &SimpleLoop) -> Vec<Point2> {
    let mut pts: Vec<Point2> = lp.vertices().to_vec();
    pts.extend(lp.curve.segments().map(|s| s.midpoint()));
    pts
}

fn within(inner: &SimpleLoop, outer: &SimpleLoop) -> (bool, bool) {
    let mut has_in = false;
    let mut has_out = false;
    for x in boundary_samples(inner) {
        match side_of(outer, x) {
            Side::In => has_in = true,
            Side::Out => has_out = true,
            Side::On => {}
        }
    }
    (has_in, has_out)
}

pub fn disk_relation(a: &SimpleLoop, b: &SimpleLoop) -> DiskRelation {
    let (a_in_b, a_out_b) = within(a, b);
    let (b_in_a, b_out_a) = within(b, a);
    if (a_in_b && a_out_b) || (b_in_a && b_out_a) {
        return DiskRelation::Crossing;
    }
    let a_sub_b = !a_out_b && (a_in_b || side_of(b, interior_point(a)) == Side::In);
    let b_sub_a = !b_out_a && (b_in_a || side_of(a, interior_point(b)) == Side::In);
    match (a_sub_b, b_sub_a) {
        (true, true) => DiskRelation::Equal,
        (true, false) => DiskRelation::Inside,
        (false, true) => DiskRelation::Contains,
        (false, false) if !a_in_b && !b_in_a => DiskRelation::Disjoint,
        _ => DiskRelation::Crossing,
    }
}

pub fn nesting_relation(loops: &[SimpleLoop]) -> Result<NestingRelation, UntangleError> {
    let mut rel = NestingRelation::default();
    for i in 0..loops.len() {
        for j in i + 1..loops.len() {
            if !loops[i].curve.bbox().intersects(&loops[j].curve.bbox(), loops[i].curve.tolerance()) {
                continue;
            }
            match disk_relation(&loops[i], &loops[j]) {
                DiskRelation::Disjoint => {}
                DiskRelation::Inside => rel.strictly_inside.push((i, j)),
                DiskRelation::Contains => rel.strictly_inside.push((j, i)),
                DiskRelation::Equal => rel.equal.push((i, j)),
                DiskRelation::Crossing => return Err(UntangleError::NestingViolated { first: i, second: j }),
            }
        }
    }
    rel.strictly_inside.sort_unstable();
    Ok(rel)
}

/// Maximal chains of strictly nested disks, each listed innermost first.
///
/// Loops bounding the same disk are represented by the smallest index among
/// them.
pub fn nested_disk_chains(loops: &[SimpleLoop]) -> Result<Vec<Vec<usize>>, UntangleError> {
    let rel = nesting_relation(loops)?;
    Ok(chains_from_relation(loops.len(), &rel))
}

pub(crate) fn chains_from_relation(n: usize, rel: &NestingRelation) -> Vec<Vec<usize>> {
    let mut rep: Vec<usize> = (0..n).collect();
    for &(i, j) in &rel.equal {
        let (a, b) = (rep[i].min(rep[j]), rep[i].max(rep[j]));
        for r in rep.iter_mut() {
            if *r == b {
                *r = a;
            }
        }
    }
    let mut inside = vec![vec![false; n]; n];
    for &(i, j) in &rel.strictly_inside {
        inside[rep[i]][rep[j]] = true;
    }
    let reps: Vec<usize> = (0..n).filter(|&i| rep[i] == i).collect();
    // covers[k] lists the disks directly above k.
    let covers: Vec<Vec<usize>> = (0..n)
        .map(|k| {
            reps.iter()
                .copied()
                .filter(|&j| inside[k][j] && !reps.iter().any(|&m| inside[k][m] && inside[m][j]))
                .collect()
        })
        .collect();
    let minimal: Vec<usize> = reps
        .iter()
        .copied()
        .filter(|&k| !reps.iter().any(|&m| inside[m][k]))
        .collect();
    let mut chains = Vec::new();
    let mut path = Vec::new();
    for &start in &minimal {
        extend_chain(start, &covers, &mut path, &mut chains);
    }
    chains
}

fn extend_chain(k: usize, covers: &[Vec<usize>], path: &mut Vec<usize>, chains: &mut Vec<Vec<usize>>) {
    if chains.len() >= MAX_CHAINS {
        return;
    }
    path.push(k);
    if covers[k].is_empty() {
        chains.push(path.clone());
    } else {
        for &j in &covers[k] {
            extend_chain(j, covers, path, chains);
        }
    }
    path.pop();
}

/// x-intervals where the horizontal line at `y` is inside the polygon.
fn scanline_intervals(vertices: &[Point2], y: f64) -> Vec<(f64, f64)> {
    let n = vertices.len();
    let mut xs = Vec::new();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if (a.y > y) != (b.y > y) {
            xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.chunks_exact(2).map(|c| (c[0], c[1])).filter(|(a, b)| b > a).collect()
}

/// A point strictly inside the loop: the area centroid when it lies inside,
/// otherwise the middle of the widest scanline interval.
pub fn interior_point(lp: &SimpleLoop) -> Point2 {
    let v = lp.vertices();
    let area = lp.curve.signed_area();
    if area.abs() > 0.0 {
        let mut c = Point2::ORIGIN;
        let n = v.len();
        for i in 0..n {
            let (a, b) = (v[i] - v[0], v[(i + 1) % n] - v[0]);
            c = c + (a + b) * a.cross(b);
        }
        let centroid = v[0] + c * (1.0 / (6.0 * area));
        if side_of(lp, centroid) == Side::In {
            return centroid;
        }
    }
    let bb = lp.curve.bbox();
    let mut best: Option<(f64, Point2)> = None;
    for k in 1..16 {
        let y = bb.min.y + bb.height() * (k as f64 / 16.0 + 0.0123);
        for (x0, x1) in scanline_intervals(v, y) {
            if best.is_none_or(|(w, _)| x1 - x0 > w) {
                best = Some((x1 - x0, Point2::new(0.5 * (x0 + x1), y)));
            }
        }
    }
    best.map(|(_, p)| p).unwrap_or_else(|| bb.center())
}

/// Uniform-in-area samples from the open disk bounded by the loop, kept at
/// least `clearance` away from the loop.
pub fn sample_interior(lp: &SimpleLoop, count: usize, clearance: f64, rng: &mut impl Rng) -> Vec<Point2> {
    let v = lp.vertices();
    let bb = lp.curve.bbox();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < count * 200 {
        attempts += 1;
        let y = rng.gen_range(bb.min.y..=bb.max.y);
        let intervals = scanline_intervals(v, y);
        let total: f64 = intervals.iter().map(|(a, b)| b - a).sum();
        if total <= 0.0 {
            continue;
        }
        // Accept rows in proportion to their inside length.
        if rng.gen_range(0.0..1.0) > total / bb.width().max(f64::MIN_POSITIVE) {
            continue;
        }
        let mut pick = rng.gen_range(0.0..total);
        for (x0, x1) in intervals {
            if pick <= x1 - x0 {
                let p = Point2::new(x0 + pick, y);
                if lp.curve.distance_to_point(p) > clearance {
                    out.push(p);
                }
                break;
            }
            pick -= x1 - x0;
        }
    }
    out
}

/// Interior samples of loop `idx` used by the kappa check; deterministic in
/// `(seed, idx)`.
pub(crate) fn kappa_samples(curve: &ClosedPolyCurve, lp: &SimpleLoop, idx: usize, count: usize, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(idx as u64 + 1)));
    let clearance = 10.0 * curve.tolerance();
    let mut pts = Vec::with_capacity(count);
    let mut rounds = 0;
    while pts.len() < count && rounds < 10 {
        rounds += 1;
        for p in sample_interior(lp, count, clearance, &mut rng) {
            if pts.len() < count && curve.distance_to_point(p) > clearance {
                pts.push(p);
            }
        }
    }
    pts
}

fn all_nonzero(curve: &ClosedPolyCurve, pts: &[Point2]) -> bool {
    pts.iter()
        .all(|&q| matches!(winding_number(curve, q), Ok(v) if v.value != 0))
}

/// Picks a loop whose open disk carries a nonzero index of `curve` at every
/// one of `samples` interior sample points. Maximal chains are scanned
/// innermost disk first.
pub fn select_kappa(curve: &ClosedPolyCurve, loops: &[SimpleLoop], samples: usize, seed: u64) -> Result<usize, UntangleError> {
    let chains = nested_disk_chains(loops)?;
    select_kappa_in_chains(curve, loops, &chains, samples, seed)
}

pub(crate) fn select_kappa_in_chains(
    curve: &ClosedPolyCurve,
    loops: &[SimpleLoop],
    chains: &[Vec<usize>],
    samples: usize,
    seed: u64,
) -> Result<usize, UntangleError> {
    let mut tried = vec![false; loops.len()];
    let order = chains.iter().flatten().copied().chain(0..loops.len());
    for idx in order {
        if std::mem::replace(&mut tried[idx], true) {
            continue;
        }
        let pts = kappa_samples(curve, &loops[idx], idx, samples, seed);
        if pts.len() == samples && all_nonzero(curve, &pts) {
            return Ok(idx);
        }
    }
    Err(UntangleError::NoPositiveLoop)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(coords: &[(f64, f64)]) -> SimpleLoop {
        let c = ClosedPolyCurve::from_coords(coords, 1e-9).unwrap();
        let n = c.len();
        SimpleLoop::new(c, (0..n).collect())
    }

    #[test]
    fn disjoint_triangles_give_singletons() {
        let a = lp(&[(0., 0.), (1., 0.), (0., 1.)]);
        let b = lp(&[(5., 0.), (6., 0.), (5., 1.)]);
        assert_eq!(nested_disk_chains(&[a, b]).unwrap(), vec![vec![0], vec![1]]);
    }

    #[test]
    fn nested_pair_and_third() {
        let outer = lp(&[(-2., -2.), (2., -2.), (2., 2.), (-2., 2.)]);
        let inner = lp(&[(-1., -1.), (1., -1.), (1., 1.), (-1., 1.)]);
        let far = lp(&[(5., 0.), (6., 0.), (5., 1.)]);
        assert_eq!(disk_relation(&inner, &outer), DiskRelation::Inside);
        let chains = nested_disk_chains(&[outer, inner, far]).unwrap();
        assert_eq!(chains, vec![vec![1, 0], vec![2]]);
    }

    #[test]
    fn crossing_loops_rejected() {
        let a = lp(&[(0., 0.), (2., 0.), (2., 2.), (0., 2.)]);
        let b = lp(&[(1., 1.), (3., 1.), (3., 3.), (1., 3.)]);
        assert!(matches!(nested_disk_chains(&[a, b]), Err(UntangleError::NestingViolated { .. })));
    }

    #[test]
    fn interior_point_of_nonconvex_loop() {
        // A thin C shape whose centroid lies outside.
        let c = lp(&[(0., 0.), (3., 0.), (3., 0.2), (0.2, 0.2), (0.2, 2.8), (3., 2.8), (3., 3.), (0., 3.)]);
        let q = interior_point(&c);
        assert_eq!(winding_number(&c.curve, q).unwrap().value, 1);
    }

    #[test]
    fn samples_are_inside() {
        let c = lp(&[(0., 0.), (3., 0.), (3., 0.2), (0.2, 0.2), (0.2, 2.8), (3., 2.8), (3., 3.), (0., 3.)]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = sample_interior(&c, 100, 1e-8, &mut rng);
        assert_eq!(pts.len(), 100);
        for q in pts {
            assert_eq!(winding_number(&c.curve, q).unwrap().value, 1);
        }
    }

    #[test]
    fn kappa_for_square() {
        let sq = lp(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]);
        let curve = sq.curve.clone();
        assert_eq!(select_kappa(&curve, &[sq], 50, 1).unwrap(), 0);
    }
}
