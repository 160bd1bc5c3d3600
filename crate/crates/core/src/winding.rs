//! Winding numbers of closed polygonal curves.
//!
//! [`winding_number`] sums signed angles; [`winding_number_oracle`] counts
//! signed ray crossings and is kept as an independent check.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{ClosedPolyCurve, Point2};

/// Largest allowed distance, in turns, between the angle sum and an integer.
pub const MAX_RESIDUAL_TURNS: f64 = 0.25;

const PROBE_RETRIES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexValue {
    pub value: i64,
    pub distance_to_curve: f64,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum WindingError {
    #[error("query point lies on the curve (distance {distance})")]
    PointOnCurve { distance: f64 },
    #[error("angle sum is {residual} turns away from an integer")]
    NumericallyAmbiguous { residual: f64 },
    #[error("no transversal probe ray found after {attempts} attempts")]
    DegenerateProbe { attempts: usize },
}

fn off_curve_distance(curve: &ClosedPolyCurve, q: Point2) -> Result<f64, WindingError> {
    let distance = curve.distance_to_point(q);
    if distance <= curve.tolerance() {
        Err(WindingError::PointOnCurve { distance })
    } else {
        Ok(distance)
    }
}

/// Total signed turning, in turns, of the vector from `q` to the curve.
pub fn turning_sum(vertices: &[Point2], q: Point2) -> f64 {
    let n = vertices.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = vertices[i] - q;
        let b = vertices[(i + 1) % n] - q;
        total += a.cross(b).atan2(a.dot(b));
    }
    total / TAU
}

pub fn winding_number(curve: &ClosedPolyCurve, q: Point2) -> Result<IndexValue, WindingError> {
    let distance_to_curve = off_curve_distance(curve, q)?;
    let turns = turning_sum(curve.vertices(), q);
    let value = turns.round();
    let residual = (turns - value).abs();
    if residual >= MAX_RESIDUAL_TURNS {
        return Err(WindingError::NumericallyAmbiguous { residual });
    }
    Ok(IndexValue {
        value: value as i64,
        distance_to_curve,
    })
}

/// Signed crossing count of the ray from `q` along `probe_direction`.
///
/// When the ray passes within tolerance of a vertex, the direction is
/// rotated by an irrational fraction of a turn and the count retried.
pub fn winding_number_oracle(
    curve: &ClosedPolyCurve,
    q: Point2,
    probe_direction: Point2,
) -> Result<IndexValue, WindingError> {
    let distance_to_curve = off_curve_distance(curve, q)?;
    let tol = curve.tolerance();
    let base = probe_direction.y.atan2(probe_direction.x);
    let golden = PI * (3.0 - 5f64.sqrt());
    for attempt in 0..PROBE_RETRIES {
        let angle = base + attempt as f64 * golden;
        if let Some(value) = ray_crossings(curve.vertices(), q, angle, tol) {
            return Ok(IndexValue {
                value,
                distance_to_curve,
            });
        }
    }
    Err(WindingError::DegenerateProbe {
        attempts: PROBE_RETRIES,
    })
}

fn ray_crossings(vertices: &[Point2], q: Point2, angle: f64, tol: f64) -> Option<i64> {
    // Work in a frame where the ray is the positive x axis.
    let local: Vec<Point2> = vertices.iter().map(|&v| (v - q).rotated(-angle)).collect();
    if local.iter().any(|v| v.x > -tol && v.y.abs() <= tol) {
        return None;
    }
    let n = local.len();
    let mut count = 0i64;
    for i in 0..n {
        let a = local[i];
        let b = local[(i + 1) % n];
        if (a.y > 0.0) == (b.y > 0.0) {
            continue;
        }
        let x = a.x + (b.x - a.x) * (-a.y) / (b.y - a.y);
        if x > 0.0 {
            count += if b.y > a.y { 1 } else { -1 };
        }
    }
    Some(count)
}

/// Number of passes of the curve through `x`: segments containing `x` in
/// their interior, plus vertex visits at `x`.
pub fn covering_multiplicity(curve: &ClosedPolyCurve, x: Point2) -> usize {
    let tol = curve.tolerance();
    let at_vertex = curve.vertices().iter().filter(|v| v.approx_eq(x, tol)).count();
    let interior = curve
        .segments()
        .filter(|s| {
            s.distance_to_point(x) <= tol && !s.start.approx_eq(x, tol) && !s.end.approx_eq(x, tol)
        })
        .count();
    at_vertex + interior
}
