use std::f64::consts::{FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DiffeoMap, DynamicsError, Mat2};
use crate::geom::{angle_between, candidate_pairs, segment_intersection, BoundingBox, OrientedSegment, Point2};

/// Grid sups of `|f(x) - x|` and `|Df(x) - I|` over a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C1Estimate {
    pub domain: BoundingBox,
    pub grid_step: f64,
    pub grid_points: usize,
    pub sup_displacement: f64,
    pub sup_derivative_deviation: f64,
}

impl C1Estimate {
    /// `max(sup_displacement, sup_derivative_deviation)`.
    pub fn distance(&self) -> f64 {
        self.sup_displacement.max(self.sup_derivative_deviation)
    }
}

pub fn estimate_c1_distance(f: &DiffeoMap, domain: BoundingBox, grid_step: f64) -> Result<C1Estimate, DynamicsError> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(DynamicsError::InvalidParameter("grid step must be positive".into()));
    }
    let nx = (domain.width() / grid_step).round() as usize;
    let ny = (domain.height() / grid_step).round() as usize;
    let mut sup_displacement: f64 = 0.0;
    let mut sup_derivative_deviation: f64 = 0.0;
    for i in 0..=nx {
        for j in 0..=ny {
            let x = Point2::new(
                (domain.min.x + i as f64 * grid_step).min(domain.max.x),
                (domain.min.y + j as f64 * grid_step).min(domain.max.y),
            );
            let d = f.displacement(x).norm();
            let dev = (f.jacobian(x) - Mat2::IDENTITY).op_norm();
            if !d.is_finite() || !dev.is_finite() {
                return Err(DynamicsError::NonFiniteValue { at: x });
            }
            sup_displacement = sup_displacement.max(d);
            sup_derivative_deviation = sup_derivative_deviation.max(dev);
        }
    }
    Ok(C1Estimate {
        domain,
        grid_step,
        grid_points: (nx + 1) * (ny + 1),
        sup_displacement,
        sup_derivative_deviation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct B1Report {
    pub passed: bool,
    pub radius: f64,
    pub samples: usize,
    pub min_displacement: f64,
    pub witness: Option<Point2>,
}

/// Searches the closed ball of radius `4 |f(p) - p|` around `p` for points
/// moved by at most `tol`: sunflower samples, then Newton polishing from the
/// least displaced sample.
pub fn check_b1(f: &DiffeoMap, p: Point2, samples: usize, tol: f64) -> Result<B1Report, DynamicsError> {
    let displacement = f.displacement(p).norm();
    if displacement <= tol {
        return Err(DynamicsError::FixedSeed { displacement });
    }
    let radius = 4.0 * displacement;
    let golden = PI * (3.0 - 5f64.sqrt());
    let count = samples.max(1);
    let mut points = vec![p];
    points.extend((0..count).map(|k| p + Point2::from_polar(radius * ((k as f64 + 0.5) / count as f64).sqrt(), k as f64 * golden)));
    points.extend((0..64).map(|k| p + Point2::from_polar(radius, PI * k as f64 / 32.0)));

    let mut best = (f64::INFINITY, p);
    for &x in &points {
        let d = f.displacement(x).norm();
        if d < best.0 {
            best = (d, x);
        }
    }
    let mut witness = (best.0 <= tol).then_some(best.1);
    if witness.is_none() {
        if let Some(x) = newton_fixed_point(f, best.1, 50) {
            let d = f.displacement(x).norm();
            if d <= tol && x.distance(p) <= radius {
                witness = Some(x);
                best.0 = best.0.min(d);
            }
        }
    }
    Ok(B1Report {
        passed: witness.is_none(),
        radius,
        samples: points.len(),
        min_displacement: best.0,
        witness,
    })
}

/// Newton iteration on `f(x) - x`; `None` when it stalls or diverges.
pub(crate) fn newton_fixed_point(f: &DiffeoMap, start: Point2, max_iter: usize) -> Option<Point2> {
    let mut x = start;
    let mut r = f.displacement(x).norm();
    for _ in 0..max_iter {
        if r == 0.0 {
            break;
        }
        let a = f.jacobian(x) - Mat2::IDENTITY;
        let step = a.inverse()?.apply(f.displacement(x));
        let y = x - step;
        let ry = f.displacement(y).norm();
        if !(ry < r) {
            break;
        }
        x = y;
        r = ry;
    }
    x.is_finite().then_some(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct B2Report {
    pub passed: bool,
    /// Largest angle between two intersecting orbit segments; 0 if none meet.
    pub worst_angle: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub intersecting_pairs: usize,
}

/// Angles between intersecting segments `[f^j p, f^(j+1) p]`, `0 <= j < m`;
/// passes iff every angle is below `pi / 4`.
pub fn check_b2(f: &DiffeoMap, p: Point2, m: usize, tol: f64) -> B2Report {
    let mut pts = vec![p];
    let mut x = p;
    for _ in 0..m {
        x = f.eval(x);
        pts.push(x);
    }
    let segments: Vec<(usize, OrientedSegment)> = (0..m)
        .filter_map(|j| OrientedSegment::new(pts[j], pts[j + 1], tol).ok().map(|s| (j, s)))
        .collect();
    let plain: Vec<OrientedSegment> = segments.iter().map(|s| s.1).collect();
    let mut worst_angle: f64 = 0.0;
    let mut worst_pair = None;
    let mut intersecting_pairs = 0;
    for (a, b) in candidate_pairs(&plain, tol) {
        if segment_intersection(&plain[a], &plain[b], tol).is_none() {
            continue;
        }
        intersecting_pairs += 1;
        let angle = angle_between(&plain[a], &plain[b]);
        if angle > worst_angle || worst_pair.is_none() {
            worst_angle = worst_angle.max(angle);
            worst_pair = Some((segments[a].0, segments[b].0));
        }
    }
    B2Report {
        passed: worst_angle < FRAC_PI_4,
        worst_angle,
        worst_pair,
        intersecting_pairs,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentEstimateReport {
    pub passed: bool,
    pub k: f64,
    pub triples: usize,
    pub worst_ratio: f64,
    /// `(p, q, lambda)` attaining the worst ratio when it exceeds `k`.
    pub witness: Option<[Point2; 3]>,
}

/// Tests `|f(l) - f(p)| <= k |f(q) - f(p)|` for random `p, q` in `domain` and
/// `l` on `[p, q]`.
pub fn check_segment_estimate(
    f: &DiffeoMap,
    domain: BoundingBox,
    k: f64,
    triples: usize,
    seed: u64,
) -> Result<SegmentEstimateReport, DynamicsError> {
    if !(k > 1.0) {
        return Err(DynamicsError::InvalidParameter("K must exceed 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        Point2::new(
            rng.gen_range(domain.min.x..=domain.max.x),
            rng.gen_range(domain.min.y..=domain.max.y),
        )
    };
    let mut worst_ratio: f64 = 0.0;
    let mut worst = None;
    for _ in 0..triples {
        let p = draw(&mut rng);
        let q = draw(&mut rng);
        let l = p.lerp(q, rng.gen_range(0.0..=1.0));
        let fp = f.eval(p);
        let den = f.eval(q).distance(fp);
        if den == 0.0 {
            continue;
        }
        let ratio = f.eval(l).distance(fp) / den;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst = Some([p, q, l]);
        }
    }
    let passed = worst_ratio <= k;
    Ok(SegmentEstimateReport {
        passed,
        k,
        triples,
        worst_ratio,
        witness: if passed { None } else { worst },
    })
}
