use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::nesting::{kappa_samples, nesting_relation, NestingRelation};
use super::{SimpleLoop, UntangleError};
use crate::geom::{ClosedPolyCurve, Point2};
use crate::winding::{covering_multiplicity, winding_number};

/// Only the first failures of each property are recorded.
const MAX_RECORDED_FAILURES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckFailure {
    pub point: Option<Point2>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub property: String,
    pub passed: bool,
    pub checked: usize,
    pub failure_count: usize,
    pub failures: Vec<CheckFailure>,
}

impl PropertyCheck {
    fn new(property: &str) -> Self {
        PropertyCheck {
            property: property.to_string(),
            passed: true,
            checked: 0,
            failure_count: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, point: Option<Point2>, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.passed = false;
            self.failure_count += 1;
            if self.failures.len() < MAX_RECORDED_FAILURES {
                self.failures.push(CheckFailure {
                    point,
                    detail: detail(),
                });
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicitySample {
    pub x: Point2,
    pub curve: usize,
    pub loops: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditivitySample {
    pub q: Point2,
    pub curve_index: i64,
    pub loop_sum: i64,
}

/// Property-by-property evidence that `loops` decompose `curve`:
/// (i) equal covering multiplicity, (ii) each loop segment inside a parent
/// segment with the same orientation, (iii) nested-or-disjoint disks,
/// (iv) additivity of the index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub multiplicity: PropertyCheck,
    pub containment: PropertyCheck,
    pub nesting: PropertyCheck,
    pub additivity: PropertyCheck,
    pub multiplicity_samples: Vec<MultiplicitySample>,
    pub additivity_samples: Vec<AdditivitySample>,
    pub nesting_relation: Option<NestingRelation>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks().iter().all(|c| c.passed)
    }

    pub fn checks(&self) -> [&PropertyCheck; 4] {
        [&self.multiplicity, &self.containment, &self.nesting, &self.additivity]
    }
}

/// Random points on the curve, chosen with probability proportional to length.
fn on_curve_samples(curve: &ClosedPolyCurve, count: usize, rng: &mut impl Rng) -> Vec<Point2> {
    let segs: Vec<_> = curve.segments().collect();
    let total = curve.length();
    (0..count)
        .map(|_| {
            let mut pick = rng.gen_range(0.0..total);
            for s in &segs {
                let len = s.length();
                if pick <= len {
                    return s.point_at(pick / len);
                }
                pick -= len;
            }
            segs[segs.len() - 1].end
        })
        .collect()
}

/// Random points of the curve's enlarged bounding box at distance more than
/// `clearance` from the curve.
pub(crate) fn off_curve_samples(curve: &ClosedPolyCurve, count: usize, clearance: f64, rng: &mut impl Rng) -> Vec<Point2> {
    let bb = curve.bbox();
    let bb = bb.expanded(0.1 * bb.diagonal());
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < count * 1000 {
        attempts += 1;
        let q = Point2::new(rng.gen_range(bb.min.x..=bb.max.x), rng.gen_range(bb.min.y..=bb.max.y));
        if curve.distance_to_point(q) > clearance {
            out.push(q);
        }
    }
    out
}

pub fn verify_decomposition(curve: &ClosedPolyCurve, loops: &[SimpleLoop], samples: usize, seed: u64) -> VerificationReport {
    let tol = curve.tolerance();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut multiplicity = PropertyCheck::new("i");
    let mut multiplicity_samples = Vec::new();
    let mut points: Vec<Point2> = curve.vertices().to_vec();
    points.extend(on_curve_samples(curve, samples, &mut rng));
    for x in points {
        let c = covering_multiplicity(curve, x);
        let l: usize = loops.iter().map(|lp| covering_multiplicity(&lp.curve, x)).sum();
        multiplicity.record(c == l, Some(x), || format!("curve covers {c} times, loops {l} times"));
        multiplicity_samples.push(MultiplicitySample { x, curve: c, loops: l });
    }

    let mut containment = PropertyCheck::new("ii");
    for (j, lp) in loops.iter().enumerate() {
        if lp.parent_segment_map.len() != lp.curve.len() {
            containment.record(false, None, || format!("loop {j}: parent map has wrong length"));
            continue;
        }
        for (i, s) in lp.curve.segments().enumerate() {
            let parent_idx = lp.parent_segment_map[i];
            let ok = parent_idx < curve.len() && {
                let parent = curve.segment(parent_idx);
                parent.distance_to_point(s.start) <= tol
                    && parent.distance_to_point(s.end) <= tol
                    && parent.direction().dot(s.direction()) > 0.0
            };
            containment.record(ok, Some(s.midpoint()), || {
                format!("loop {j} segment {i} is not inside segment {parent_idx} with the same orientation")
            });
        }
    }

    let mut nesting = PropertyCheck::new("iii");
    let relation = match nesting_relation(loops) {
        Ok(rel) => {
            nesting.record(true, None, String::new);
            Some(rel)
        }
        Err(e) => {
            let msg = e.to_string();
            nesting.record(false, None, || msg);
            None
        }
    };

    let mut additivity = PropertyCheck::new("iv");
    let mut additivity_samples = Vec::new();
    for q in off_curve_samples(curve, samples, 100.0 * tol, &mut rng) {
        let ci = winding_number(curve, q).map(|v| v.value);
        let sum: Result<i64, _> = loops.iter().map(|lp| winding_number(&lp.curve, q).map(|v| v.value)).sum();
        match (ci, sum) {
            (Ok(c), Ok(s)) => {
                additivity.record(c == s, Some(q), || format!("index {c} but loops sum to {s}"));
                additivity_samples.push(AdditivitySample {
                    q,
                    curve_index: c,
                    loop_sum: s,
                });
            }
            (c, s) => additivity.record(false, Some(q), || format!("index not computable: {c:?} / {s:?}")),
        }
    }

    VerificationReport {
        multiplicity,
        containment,
        nesting,
        additivity,
        multiplicity_samples,
        additivity_samples,
        nesting_relation: relation,
    }
}

/// (v): every interior sample of the disk of loop `kappa` has nonzero index.
pub fn check_kappa(curve: &ClosedPolyCurve, loops: &[SimpleLoop], kappa: usize, samples: usize, seed: u64) -> PropertyCheck {
    let mut check = PropertyCheck::new("v");
    let pts = kappa_samples(curve, &loops[kappa], kappa, samples, seed);
    if pts.len() < samples {
        check.record(false, None, || format!("only {} interior samples found", pts.len()));
    }
    for q in pts {
        let r = winding_number(curve, q);
        let ok = matches!(r, Ok(v) if v.value != 0);
        check.record(ok, Some(q), || format!("index at interior point is {r:?}"));
    }
    check
}

pub(crate) fn first_failure(report: &VerificationReport) -> Option<UntangleError> {
    report.checks().into_iter().find(|c| !c.passed).map(|c| UntangleError::VerificationFailed {
        property: c.property.clone(),
        detail: c
            .failures
            .first()
            .map(|f| format!("{} ({} failures)", f.detail, c.failure_count))
            .unwrap_or_default(),
    })
}
