//! Capital points: fixed points around which orbit curves at return times
//! have nonzero index.

use serde::{Deserialize, Serialize};

use super::degree::fixed_point_in_disk;
use super::orbit::{orbit_curve, return_distances};
use super::{DiffeoMap, DynamicsError, MapDescriptor};
use crate::geom::Point2;
use crate::untangle::{decompose, DecomposeConfig};
use crate::winding::{winding_number, winding_number_oracle};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CapitalConfig {
    pub fixed_tol: f64,
    /// Upper bound on `|f^n(p) - p|` for `n` to count as a return time.
    pub return_tol: f64,
    pub max_iter: usize,
    /// Return times longer than this are not turned into orbit curves.
    pub max_curve_len: usize,
    /// Orbit curves tried before giving up.
    pub max_candidates: usize,
    pub decompose: DecomposeConfig,
}

impl Default for CapitalConfig {
    fn default() -> Self {
        CapitalConfig {
            fixed_tol: 1e-9,
            return_tol: 1e-3,
            max_iter: 20_000,
            max_curve_len: 4_000,
            max_candidates: 8,
            decompose: DecomposeConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapitalPointCertificate {
    pub point: Point2,
    pub map: MapDescriptor,
    pub base: Point2,
    /// Return times `n_k` considered, ascending.
    pub return_times: Vec<usize>,
    /// Return times whose orbit curve has nonzero index at `point`.
    pub certified_times: Vec<usize>,
    /// `Ind_point` of the orbit curve for each certified time.
    pub indices: Vec<i64>,
    /// Return time whose decomposition located `point`.
    pub located_with: usize,
    pub residual: f64,
    pub fixer_residuals: Vec<f64>,
    /// Displacement degree along the selected loop.
    pub degree: i64,
    pub trace: Vec<String>,
}

/// Finds a fixed point `q` of `f`, also fixed by `fixers`, such that the
/// orbit curves of `p` at its return times wind around `q`.
///
/// Return times are taken with tolerance `min(return_tol, |f(p) - p| / 4)`,
/// keeping those whose return distance does not increase. For each one the
/// orbit curve is decomposed, a loop of nonzero index is selected and a
/// fixed point of `f` is searched in its disk.
pub fn find_capital_point(
    f: &DiffeoMap,
    fixers: &[DiffeoMap],
    p: Point2,
    config: &CapitalConfig,
) -> Result<CapitalPointCertificate, DynamicsError> {
    let tol = config.fixed_tol;
    let delta = f.displacement(p).norm();
    if delta <= tol {
        return Err(DynamicsError::FixedSeed { displacement: delta });
    }
    for g in fixers {
        let residual = g.displacement(p).norm();
        if residual > tol {
            return Err(DynamicsError::SeedNotFixed {
                label: g.label().to_string(),
                residual,
            });
        }
    }

    let return_tol = config.return_tol.min(0.25 * delta);
    let mut record = f64::INFINITY;
    let candidates: Vec<usize> = return_distances(f, p, return_tol, config.max_iter)
        .into_iter()
        .filter(|&(n, d)| {
            let keep = n >= 3 && n <= config.max_curve_len && d <= record;
            if keep {
                record = d;
            }
            keep
        })
        .map(|(n, _)| n)
        .collect();
    if candidates.is_empty() {
        return Err(DynamicsError::NoReturns);
    }

    let mut trace = Vec::new();
    let mut found = None;
    let mut curves = Vec::new();
    for &n in candidates.iter().take(config.max_candidates) {
        let oc = match orbit_curve(f, p, n, tol) {
            Ok(oc) => oc,
            Err(e) => {
                trace.push(format!("n = {n}: {e}"));
                continue;
            }
        };
        if found.is_none() {
            match locate(f, &oc.curve, config) {
                Ok((cert, degree)) => found = Some((n, cert, degree)),
                Err(e) => trace.push(format!("n = {n}: {e}")),
            }
        }
        curves.push((n, oc.curve));
    }
    let Some((located_with, cert, degree)) = found else {
        return Err(DynamicsError::DegenerateOrbitCurve(trace.join("; ")));
    };
    let q = cert.point;

    let mut fixer_residuals = Vec::with_capacity(fixers.len());
    for g in fixers {
        let residual = g.displacement(q).norm();
        if residual > tol {
            return Err(DynamicsError::CommonFixCheckFailed {
                label: g.label().to_string(),
                residual,
            });
        }
        fixer_residuals.push(residual);
    }

    let mut certified_times = Vec::new();
    let mut indices = Vec::new();
    for (n, curve) in &curves {
        let (Ok(ind), Ok(oracle)) = (winding_number(curve, q), winding_number_oracle(curve, q, Point2::new(1.0, 0.0)))
        else {
            trace.push(format!("n = {n}: index undefined at q"));
            continue;
        };
        if ind.value != oracle.value {
            trace.push(format!("n = {n}: index {} disagrees with oracle {}", ind.value, oracle.value));
            continue;
        }
        if ind.value != 0 {
            certified_times.push(*n);
            indices.push(ind.value);
        }
    }
    if !certified_times.contains(&located_with) {
        return Err(DynamicsError::DegenerateOrbitCurve(format!(
            "orbit curve at n = {located_with} has index 0 at the located point"
        )));
    }

    Ok(CapitalPointCertificate {
        point: q,
        map: f.descriptor(),
        base: p,
        return_times: candidates,
        certified_times,
        indices,
        located_with,
        residual: cert.residual,
        fixer_residuals,
        degree,
        trace,
    })
}

fn locate(
    f: &DiffeoMap,
    curve: &crate::geom::ClosedPolyCurve,
    config: &CapitalConfig,
) -> Result<(super::FixedPointCertificate, i64), DynamicsError> {
    let report = decompose(curve, &config.decompose)?;
    let lp = &report.loops[report.kappa];
    let cert = fixed_point_in_disk(f, lp, config.fixed_tol)?;
    let degree = cert.degree;
    Ok((cert, degree))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;

    #[test]
    fn heptagon_rotation() {
        let c = Point2::new(0.3, 0.2);
        let f = DiffeoMap::rotation(c, TAU / 7.0);
        let cert = find_capital_point(&f, &[], Point2::new(1.0, 0.0), &CapitalConfig::default()).unwrap();
        assert!(cert.point.distance(c) < 1e-9);
        assert_eq!(cert.located_with, 7);
        assert_eq!(cert.indices[0], 1);
        assert!(cert.residual < 1e-9);
    }

    #[test]
    fn shared_center_fixer() {
        let c = Point2::new(0.3, 0.2);
        let f = DiffeoMap::rotation(c, TAU / 7.0);
        let g = DiffeoMap::rotation(c, 0.123);
        let p = Point2::new(1.0, 0.0);
        let pc = find_capital_point(&f, std::slice::from_ref(&g), p, &CapitalConfig::default());
        // p is not fixed by g.
        assert!(matches!(pc, Err(DynamicsError::SeedNotFixed { .. })));
        let cert = find_capital_point(&f, &[DiffeoMap::identity()], p, &CapitalConfig::default()).unwrap();
        assert!(g.displacement(cert.point).norm() < 1e-9);
    }

    #[test]
    fn translation_has_no_returns() {
        let f = DiffeoMap::translation(Point2::new(0.01, 0.0));
        assert_eq!(
            find_capital_point(&f, &[], Point2::ORIGIN, &CapitalConfig::default()),
            Err(DynamicsError::NoReturns)
        );
    }

    #[test]
    fn star_orbit_curve() {
        let f = DiffeoMap::rotation(Point2::ORIGIN, 2.0 * TAU / 5.0);
        let cert = find_capital_point(&f, &[], Point2::new(1.0, 0.0), &CapitalConfig::default()).unwrap();
        assert!(cert.point.norm() < 1e-9);
        assert_eq!(cert.indices[0], 2);
    }
}
