use serde::{Deserialize, Serialize};

use super::UntangleError;
use crate::geom::{ClosedPolyCurve, Point2};

/// Minimum `|n . v|` for a unit vector `v` to count as strictly off the line.
const CONE_MARGIN: f64 = 1e-12;

/// Oriented line through the star vertex. Incoming segments lie on its
/// right, outgoing ones on its left.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatingLine {
    pub point: Point2,
    pub direction: Point2,
}

/// One segment at a star: `segment` is its index in the curve and
/// `endpoint` its other end (`xi_i` for incoming, `nu_j` for outgoing).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarSegment {
    pub segment: usize,
    pub endpoint: Point2,
}

/// Segments entering and leaving a multiple point `b`, each list sorted so
/// that entry `i` lies to the right of entry `i + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexStar {
    pub vertex: Point2,
    pub incoming: Vec<StarSegment>,
    pub outgoing: Vec<StarSegment>,
    pub separating_line: SeparatingLine,
}

impl VertexStar {
    pub fn multiplicity(&self) -> usize {
        self.incoming.len()
    }
}

/// Finds a separating line for the given far endpoints and returns it with
/// the right-to-left orders of incoming and outgoing endpoints.
pub(crate) fn separate_cones(
    b: Point2,
    incoming: &[Point2],
    outgoing: &[Point2],
) -> Result<(SeparatingLine, Vec<usize>, Vec<usize>), UntangleError> {
    if incoming.len() != outgoing.len() || incoming.is_empty() {
        return Err(UntangleError::RankMismatch {
            vertex: b,
            incoming: incoming.len(),
            outgoing: outgoing.len(),
        });
    }
    let unit = |p: Point2| (p - b).normalized().ok_or(UntangleError::ConeSeparationFailure { vertex: b });
    let ins = incoming.iter().map(|&p| unit(p)).collect::<Result<Vec<_>, _>>()?;
    let outs = outgoing.iter().map(|&p| unit(p)).collect::<Result<Vec<_>, _>>()?;

    // Every vector that must lie strictly on the left-normal side.
    let must_be_positive: Vec<Point2> = outs.iter().copied().chain(ins.iter().map(|&u| -u)).collect();
    let margin = |n: Point2| {
        must_be_positive
            .iter()
            .map(|v| v.dot(n))
            .fold(f64::INFINITY, f64::min)
    };

    let mut normal = must_be_positive
        .iter()
        .fold(Point2::ORIGIN, |acc, &v| acc + v)
        .normalized();
    if normal.is_none_or(|n| margin(n) <= CONE_MARGIN) {
        normal = search_gap_normal(&must_be_positive).filter(|&n| margin(n) > CONE_MARGIN);
    }
    let n = normal.ok_or(UntangleError::ConeSeparationFailure { vertex: b })?;
    let direction = Point2::new(n.y, -n.x);

    let order = |vs: &[Point2]| {
        let mut idx: Vec<usize> = (0..vs.len()).collect();
        idx.sort_by(|&i, &j| vs[j].dot(direction).total_cmp(&vs[i].dot(direction)).then(i.cmp(&j)));
        idx
    };
    Ok((
        SeparatingLine {
            point: b,
            direction,
        },
        order(&ins),
        order(&outs),
    ))
}

/// Tries normals pointing away from the middle of each angular gap between
/// consecutive directions and keeps the one with the largest margin.
fn search_gap_normal(vectors: &[Point2]) -> Option<Point2> {
    let mut angles: Vec<f64> = vectors.iter().map(|v| v.y.atan2(v.x)).collect();
    angles.sort_by(f64::total_cmp);
    let k = angles.len();
    let mut best: Option<(f64, Point2)> = None;
    for i in 0..k {
        let lo = angles[i];
        let hi = if i + 1 < k { angles[i + 1] } else { angles[0] + std::f64::consts::TAU };
        let gap_mid = 0.5 * (lo + hi);
        let n = Point2::from_polar(1.0, gap_mid + std::f64::consts::PI);
        let m = vectors.iter().map(|v| v.dot(n)).fold(f64::INFINITY, f64::min);
        if best.is_none_or(|(bm, _)| m > bm) {
            best = Some((m, n));
        }
    }
    best.map(|(_, n)| n)
}

/// Builds the star of the curve at vertex `b`.
pub fn build_vertex_star(curve: &ClosedPolyCurve, b: Point2) -> Result<VertexStar, UntangleError> {
    let tol = curve.tolerance();
    let n = curve.len();
    let visits: Vec<usize> = (0..n).filter(|&i| curve.vertex(i).approx_eq(b, tol)).collect();
    if visits.is_empty() {
        return Err(UntangleError::NotAVertex(b));
    }
    let incoming: Vec<StarSegment> = visits
        .iter()
        .map(|&i| {
            let s = (i + n - 1) % n;
            StarSegment {
                segment: s,
                endpoint: curve.vertex(s),
            }
        })
        .collect();
    let outgoing: Vec<StarSegment> = visits
        .iter()
        .map(|&i| StarSegment {
            segment: i,
            endpoint: curve.vertex(i + 1),
        })
        .collect();
    let ins: Vec<Point2> = incoming.iter().map(|s| s.endpoint).collect();
    let outs: Vec<Point2> = outgoing.iter().map(|s| s.endpoint).collect();
    let (separating_line, in_order, out_order) = separate_cones(b, &ins, &outs)?;
    Ok(VertexStar {
        vertex: b,
        incoming: in_order.iter().map(|&i| incoming[i]).collect(),
        outgoing: out_order.iter().map(|&i| outgoing[i]).collect(),
        separating_line,
    })
}

/// Number of pairs of strands through the star that cross transversally
/// under the curve's current successor relation.
///
/// Strands are (incoming rank, outgoing rank) pairs; two strands cross
/// exactly when their ranks are inversely ordered.
pub fn persistent_crossings(curve: &ClosedPolyCurve, star: &VertexStar) -> usize {
    let n = curve.len();
    let out_rank = |seg: usize| star.outgoing.iter().position(|s| s.segment == seg);
    let strands: Vec<(usize, usize)> = star
        .incoming
        .iter()
        .enumerate()
        .filter_map(|(r, s)| out_rank((s.segment + 1) % n).map(|q| (r, q)))
        .collect();
    count_inversions(&strands)
}

pub(crate) fn count_inversions(strands: &[(usize, usize)]) -> usize {
    let mut count = 0;
    for i in 0..strands.len() {
        for j in i + 1..strands.len() {
            let (p1, q1) = strands[i];
            let (p2, q2) = strands[j];
            if (p1 < p2) != (q1 < q2) {
                count += 1;
            }
        }
    }
    count
}

/// Reconnects the star so that incoming segment `i` is followed by outgoing
/// segment `i`, and returns the closed curves traced by the new successor
/// relation.
pub fn resolve_vertex(curve: &ClosedPolyCurve, star: &VertexStar) -> Result<Vec<ClosedPolyCurve>, UntangleError> {
    if star.incoming.len() != star.outgoing.len() {
        return Err(UntangleError::RankMismatch {
            vertex: star.vertex,
            incoming: star.incoming.len(),
            outgoing: star.outgoing.len(),
        });
    }
    let n = curve.len();
    let mut succ: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    for (i, o) in star.incoming.iter().zip(&star.outgoing) {
        succ[i.segment] = o.segment;
    }
    let mut out = Vec::new();
    for cycle in trace_cycles(&succ) {
        let vertices = cycle.iter().map(|&e| curve.vertex(e)).collect();
        out.push(ClosedPolyCurve::new(vertices, curve.tolerance())?);
    }
    Ok(out)
}

/// Cycles of a successor permutation, each starting at its smallest element,
/// in order of that element.
pub(crate) fn trace_cycles(succ: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; succ.len()];
    let mut cycles = Vec::new();
    for start in 0..succ.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut e = start;
        while !seen[e] {
            seen[e] = true;
            cycle.push(e);
            e = succ[e];
        }
        cycles.push(cycle);
    }
    cycles
}
