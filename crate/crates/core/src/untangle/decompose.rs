use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::nesting::{chains_from_relation, nesting_relation, select_kappa_in_chains};
use super::star::{count_inversions, separate_cones, trace_cycles};
use super::verify::{check_kappa, first_failure, verify_decomposition, PropertyCheck, VerificationReport};
use super::{SimpleLoop, UntangleError};
use crate::geom::{
    candidate_pairs, segment_intersection, separate_overlaps_tracked, subdivide_tracked, validate_angle_hypothesis,
    ClosedPolyCurve, DetourHalf, GeomError, IntersectionKind, Point2, SegmentOrigin, TrackedCurve, VertexPool,
};

/// Number of times the separation is halved after a failed attempt.
const SEPARATION_RETRIES: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecomposeConfig {
    /// Detour offset for multiply covered segments. `None` picks
    /// `1e-3` times the shortest segment length.
    pub separation: Option<f64>,
    /// Maximum number of vertex resolutions.
    pub budget: usize,
    /// Sample count for the coverage and additivity checks.
    pub samples: usize,
    /// Interior samples used to select and check the nonzero-index loop.
    pub interior_samples: usize,
    pub seed: u64,
    /// Fail instead of returning a report whose checks did not all pass.
    pub strict: bool,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig {
            separation: None,
            budget: 100_000,
            samples: 200,
            interior_samples: 50,
            seed: 42,
            strict: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecompositionStats {
    pub input_vertices: usize,
    pub working_vertices: usize,
    pub multiple_points: usize,
    pub resolution_steps: usize,
    pub crossings_resolved: usize,
    pub separation_used: Option<f64>,
    pub retained_detours: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub loops: Vec<SimpleLoop>,
    pub kappa: usize,
    pub chains: Vec<Vec<usize>>,
    pub verification: VerificationReport,
    pub kappa_check: PropertyCheck,
    pub stats: DecompositionStats,
    pub notes: Vec<String>,
}

impl DecompositionReport {
    pub fn all_passed(&self) -> bool {
        self.verification.all_passed() && self.kappa_check.passed
    }
}

/// Decomposes `curve` into simple closed loops and checks the result.
pub fn decompose(curve: &ClosedPolyCurve, config: &DecomposeConfig) -> Result<DecompositionReport, UntangleError> {
    let violations = validate_angle_hypothesis(curve);
    if !violations.is_empty() {
        return Err(UntangleError::AngleHypothesisViolated(violations));
    }
    let mut stats = DecompositionStats {
        input_vertices: curve.len(),
        ..Default::default()
    };
    let mut notes = Vec::new();

    let (separated, separation_used) = separate_with_retries(curve, config.separation)?;
    stats.separation_used = separation_used;
    let work = subdivide_tracked(&separated)?;
    stats.working_vertices = work.len();

    let succ = resolve_all(&work, config.budget, &mut stats)?;

    let mut loops = Vec::new();
    for cycle in trace_cycles(&succ) {
        for piece in split_at_repeated_vertices(&work, &cycle) {
            let (lp, retained) = build_loop(&work, &piece)?;
            if retained {
                stats.retained_detours += 1;
                notes.push(format!(
                    "loop {} keeps its separation detours: retracting them would break simplicity",
                    loops.len()
                ));
            }
            loops.push(lp);
        }
    }

    let verification = verify_decomposition(curve, &loops, config.samples, config.seed);
    if config.strict {
        if let Some(err) = first_failure(&verification) {
            return Err(err);
        }
    }
    let relation = match &verification.nesting_relation {
        Some(rel) => rel.clone(),
        None => nesting_relation(&loops)?,
    };
    let chains = chains_from_relation(loops.len(), &relation);
    let kappa = select_kappa_in_chains(curve, &loops, &chains, config.interior_samples, config.seed)?;
    let kappa_check = check_kappa(curve, &loops, kappa, config.interior_samples, config.seed);

    Ok(DecompositionReport {
        loops,
        kappa,
        chains,
        verification,
        kappa_check,
        stats,
        notes,
    })
}

fn default_separation(curve: &ClosedPolyCurve) -> f64 {
    let shortest = curve.segments().map(|s| s.length()).fold(f64::INFINITY, f64::min);
    1e-3 * shortest
}

fn separate_with_retries(
    curve: &ClosedPolyCurve,
    separation: Option<f64>,
) -> Result<(TrackedCurve, Option<f64>), UntangleError> {
    let tracked = TrackedCurve::from_curve(curve);
    let mut sep = separation.unwrap_or_else(|| default_separation(curve));
    let floor = 100.0 * curve.tolerance();
    for _ in 0..=SEPARATION_RETRIES {
        match separate_overlaps_tracked(&tracked, sep) {
            Ok(out) => {
                let used = out.has_detours().then_some(sep);
                return Ok((out, used));
            }
            Err(GeomError::SeparationTooLarge { .. }) if sep / 2.0 > floor => sep /= 2.0,
            Err(e) => return Err(e.into()),
        }
    }
    Err(GeomError::SeparationTooLarge { separation: sep }.into())
}

/// Rewires the successor of every incoming segment at every multiple point
/// so that ranks match, visiting points in lexicographic order.
fn resolve_all(work: &TrackedCurve, budget: usize, stats: &mut DecompositionStats) -> Result<Vec<usize>, UntangleError> {
    let n = work.len();
    let mut pool = VertexPool::new(work.tolerance);
    let vid: Vec<usize> = work.vertices.iter().map(|&v| pool.intern(v)).collect();
    let mut visits: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &id) in vid.iter().enumerate() {
        visits.entry(id).or_default().push(i);
    }
    let mut order: Vec<(usize, Vec<usize>)> = visits.into_iter().filter(|(_, v)| v.len() >= 2).collect();
    order.sort_by(|a, b| pool.point(a.0).lex_cmp(&pool.point(b.0)));
    stats.multiple_points = order.len();

    let mut succ: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    for (id, at) in &order {
        stats.resolution_steps += 1;
        if stats.resolution_steps > budget {
            return Err(UntangleError::NonTermination { budget });
        }
        let b = pool.point(*id);
        let in_edges: Vec<usize> = at.iter().map(|&i| (i + n - 1) % n).collect();
        let out_edges: Vec<usize> = at.clone();
        let ins: Vec<Point2> = in_edges.iter().map(|&e| work.vertices[e]).collect();
        let outs: Vec<Point2> = out_edges.iter().map(|&e| work.vertices[(e + 1) % n]).collect();
        let (_, in_order, out_order) = separate_cones(b, &ins, &outs)?;

        let in_rank: Vec<usize> = rank_of(&in_order);
        let out_rank: Vec<usize> = rank_of(&out_order);
        let strands: Vec<(usize, usize)> = (0..in_edges.len())
            .map(|k| {
                let o = out_edges.iter().position(|&e| e == succ[in_edges[k]]).expect("successor leaves b");
                (in_rank[k], out_rank[o])
            })
            .collect();
        stats.crossings_resolved += count_inversions(&strands);

        for (&ik, &ok) in in_order.iter().zip(&out_order) {
            succ[in_edges[ik]] = out_edges[ok];
        }
    }
    Ok(succ)
}

fn rank_of(order: &[usize]) -> Vec<usize> {
    let mut rank = vec![0; order.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Splits a cycle of edges into sub-cycles that each visit a vertex once.
fn split_at_repeated_vertices(work: &TrackedCurve, cycle: &[usize]) -> Vec<Vec<usize>> {
    let mut pool = VertexPool::new(work.tolerance);
    let mut pieces = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut pos: BTreeMap<usize, usize> = BTreeMap::new();
    for &e in cycle {
        let v = pool.intern(work.vertices[e]);
        if let Some(&at) = pos.get(&v) {
            let piece: Vec<usize> = stack.drain(at..).collect();
            for &f in &piece {
                pos.remove(&pool.intern(work.vertices[f]));
            }
            pieces.push(piece);
        }
        pos.insert(v, stack.len());
        stack.push(e);
    }
    if !stack.is_empty() {
        pieces.push(stack);
    }
    pieces.sort_by_key(|p| *p.iter().min().expect("non-empty"));
    pieces
}

struct LoopSegment {
    start: Point2,
    origin: SegmentOrigin,
}

/// Builds a loop from a vertex-simple edge cycle, retracting separation
/// detours when the loop stays simple. Returns whether detours were kept.
fn build_loop(work: &TrackedCurve, piece: &[usize]) -> Result<(SimpleLoop, bool), UntangleError> {
    let tol = work.tolerance;
    let raw: Vec<LoopSegment> = piece
        .iter()
        .map(|&e| LoopSegment {
            start: work.vertices[e],
            origin: work.origins[e],
        })
        .collect();
    let has_detours = raw.iter().any(|s| s.origin.detour.is_some());
    if has_detours {
        let retracted = merge_collinear(retract(&raw));
        if let Some(lp) = simple_loop(&retracted, tol) {
            return Ok((lp, false));
        }
        let kept = merge_collinear(raw);
        let lp = simple_loop(&kept, tol).ok_or(UntangleError::VerificationFailed {
            property: "simple".into(),
            detail: "traced loop is not simple".into(),
        })?;
        return Ok((lp, true));
    }
    let merged = merge_collinear(raw);
    let lp = simple_loop(&merged, tol).ok_or(UntangleError::VerificationFailed {
        property: "simple".into(),
        detail: "traced loop is not simple".into(),
    })?;
    Ok((lp, false))
}

/// Replaces each `[a, apex] [apex, b]` pair by `[a, b]`.
fn retract(segs: &[LoopSegment]) -> Vec<LoopSegment> {
    let n = segs.len();
    let shift = match segs[0].origin.detour {
        Some(d) if d.half == DetourHalf::FromApex => 1,
        _ => 0,
    };
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        let s = &segs[(k + shift) % n];
        match s.origin.detour {
            Some(d) if d.half == DetourHalf::ToApex => {
                out.push(LoopSegment {
                    start: d.a,
                    origin: SegmentOrigin {
                        parent: s.origin.parent,
                        detour: None,
                    },
                });
                k += 2;
            }
            _ => {
                out.push(LoopSegment {
                    start: s.start,
                    origin: s.origin,
                });
                k += 1;
            }
        }
    }
    out
}

/// Removes vertices between two consecutive pieces of the same parent segment.
fn merge_collinear(mut segs: Vec<LoopSegment>) -> Vec<LoopSegment> {
    let mut changed = true;
    while changed && segs.len() > 3 {
        changed = false;
        let n = segs.len();
        for k in 0..n {
            let prev = &segs[(k + n - 1) % n].origin;
            let cur = &segs[k].origin;
            if prev.detour.is_none() && cur.detour.is_none() && prev.parent == cur.parent {
                segs.remove(k);
                changed = true;
                break;
            }
        }
    }
    segs
}

fn simple_loop(segs: &[LoopSegment], tol: f64) -> Option<SimpleLoop> {
    let vertices: Vec<Point2> = segs.iter().map(|s| s.start).collect();
    let curve = ClosedPolyCurve::new(vertices, tol).ok()?;
    if curve.len() < 3 || !is_simple(&curve) {
        return None;
    }
    Some(SimpleLoop::new(curve, segs.iter().map(|s| s.origin.parent).collect()))
}

/// True when segments meet only at the shared endpoint of consecutive ones.
pub(crate) fn is_simple(curve: &ClosedPolyCurve) -> bool {
    let tol = curve.tolerance();
    let n = curve.len();
    let segs: Vec<_> = curve.segments().collect();
    candidate_pairs(&segs, tol).into_iter().all(|(i, j)| {
        let r = segment_intersection(&segs[i], &segs[j], tol);
        match r.kind {
            IntersectionKind::None => true,
            IntersectionKind::Overlap => false,
            IntersectionKind::Point => {
                let at = r.at.expect("point");
                if j == i + 1 {
                    at.approx_eq(segs[i].end, tol)
                } else if i == 0 && j == n - 1 {
                    at.approx_eq(segs[i].start, tol)
                } else {
                    false
                }
            }
        }
    })
}
