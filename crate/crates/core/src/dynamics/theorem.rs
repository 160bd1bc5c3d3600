//! Common fixed points of finite commuting families, located in the convex
//! hull of a bounded orbit.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::capital::{find_capital_point, CapitalConfig};
use super::estimates::newton_fixed_point;
use super::{DiffeoMap, DynamicsError, MapDescriptor};
use crate::geom::{convex_hull, point_in_hull, BoundingBox, ConvexPolygon, HullMembership, Point2};
use crate::untangle::DecomposeConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TheoremConfig {
    /// Residual below which a point counts as fixed.
    pub fixed_tol: f64,
    pub return_tol: f64,
    /// Displacement below which an orbit sample is taken as a fixed point
    /// of the orbit closure and polished.
    pub closure_tol: f64,
    pub max_iter: usize,
    pub max_curve_len: usize,
    pub orbit_samples: usize,
    pub commutation_samples: usize,
    pub commutation_tol: f64,
    /// Orbits leaving this box are unbounded.
    pub domain: BoundingBox,
    pub seed: u64,
    pub decompose: DecomposeConfig,
}

impl Default for TheoremConfig {
    fn default() -> Self {
        TheoremConfig {
            fixed_tol: 1e-9,
            return_tol: 1e-3,
            closure_tol: 1e-6,
            max_iter: 20_000,
            max_curve_len: 4_000,
            orbit_samples: 10_000,
            commutation_samples: 64,
            commutation_tol: 1e-9,
            domain: BoundingBox::centered(Point2::ORIGIN, 10.0),
            seed: 42,
            decompose: DecomposeConfig::default(),
        }
    }
}

impl TheoremConfig {
    fn capital(&self) -> CapitalConfig {
        CapitalConfig {
            fixed_tol: self.fixed_tol,
            return_tol: self.return_tol,
            max_iter: self.max_iter,
            max_curve_len: self.max_curve_len,
            decompose: self.decompose.clone(),
            ..CapitalConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepCase {
    /// The current point is already fixed by the map.
    AlreadyFixed,
    /// A fixed point found in the closure of the orbit.
    OrbitClosure,
    /// A capital point found through orbit curves at return times.
    CapitalPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub map: String,
    pub case: StepCase,
    pub start: Point2,
    pub point: Point2,
    pub residual: f64,
    pub return_time: Option<usize>,
    pub index: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapResidual {
    pub label: String,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremCertificate {
    pub generators: Vec<MapDescriptor>,
    /// Number of leading generators that fix the seed.
    pub fixed_count: usize,
    pub seed: Point2,
    pub fixed_point: Point2,
    pub residuals: Vec<MapResidual>,
    pub hull: ConvexPolygon,
    pub hull_membership: HullMembership,
    /// Distance from the fixed point to the hull boundary, positive inside.
    pub hull_margin: f64,
    pub orbit_samples: usize,
    pub commutator_residual: f64,
    pub steps: Vec<StepRecord>,
}

/// Largest `|f(g(x)) - g(f(x))|` over random points of `domain`, for all pairs.
pub fn check_commutation(
    maps: &[DiffeoMap],
    domain: BoundingBox,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<f64, DynamicsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Point2> = (0..samples)
        .map(|_| {
            Point2::new(
                rng.gen_range(domain.min.x..=domain.max.x),
                rng.gen_range(domain.min.y..=domain.max.y),
            )
        })
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..maps.len() {
        for j in i + 1..maps.len() {
            let (f, g) = (&maps[i], &maps[j]);
            let residual = points
                .iter()
                .map(|&x| f.eval(g.eval(x)).distance(g.eval(f.eval(x))))
                .fold(0.0, f64::max);
            if !(residual < tol) {
                return Err(DynamicsError::CommutationViolation {
                    first: f.label().to_string(),
                    second: g.label().to_string(),
                    residual,
                });
            }
            worst = worst.max(residual);
        }
    }
    Ok(worst)
}

/// `count` points of the forward orbit of `p` under the semigroup generated
/// by `maps`: the seed, iterates of each generator, then a random word.
pub fn sample_orbit(
    maps: &[DiffeoMap],
    p: Point2,
    count: usize,
    domain: BoundingBox,
    seed: u64,
) -> Result<Vec<Point2>, DynamicsError> {
    let mut out = vec![p];
    if maps.is_empty() || count <= 1 {
        return Ok(out);
    }
    let check = |x: Point2, step: usize| -> Result<Point2, DynamicsError> {
        if !x.is_finite() {
            return Err(DynamicsError::NonFiniteIterate { step });
        }
        if !domain.contains(x) {
            return Err(DynamicsError::UnboundedOrbit { at: x });
        }
        Ok(x)
    };
    let per_map = (count - 1) / (2 * maps.len());
    for f in maps {
        let mut x = p;
        for step in 1..=per_map {
            x = check(f.eval(x), step)?;
            out.push(x);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = p;
    let mut step = 0;
    while out.len() < count {
        step += 1;
        x = check(maps[rng.gen_range(0..maps.len())].eval(x), step)?;
        out.push(x);
    }
    Ok(out)
}

/// Finds a common fixed point of `g_fixed` and `f_family` in the convex hull
/// of the orbit of `p` under `f_family`.
///
/// Every map of `g_fixed` must fix `p`. The maps of `f_family` are handled
/// one at a time: from the current point, fixed by all maps handled so far,
/// a fixed point of the next map is taken from the orbit closure when some
/// orbit sample is almost fixed, and otherwise as a capital point.
pub fn locate_common_fixed_point(
    g_fixed: &[DiffeoMap],
    f_family: &[DiffeoMap],
    p: Point2,
    config: &TheoremConfig,
) -> Result<TheoremCertificate, DynamicsError> {
    let all: Vec<DiffeoMap> = g_fixed.iter().chain(f_family).cloned().collect();
    let commutator_residual = check_commutation(
        &all,
        config.domain,
        config.commutation_samples,
        config.seed,
        config.commutation_tol,
    )?;
    for g in g_fixed {
        let residual = g.displacement(p).norm();
        if residual > config.fixed_tol {
            return Err(DynamicsError::SeedNotFixed {
                label: g.label().to_string(),
                residual,
            });
        }
    }
    let samples = sample_orbit(f_family, p, config.orbit_samples, config.domain, config.seed)?;

    let mut current = p;
    let mut fixers: Vec<DiffeoMap> = g_fixed.to_vec();
    let mut steps = Vec::new();
    let mut trace = Vec::new();
    for (i, f) in f_family.iter().enumerate() {
        let fail = |trace: &mut Vec<String>, msg: String| {
            trace.push(msg);
            DynamicsError::LocalizationFailure {
                step: i,
                trace: trace.clone(),
            }
        };
        let residual = f.displacement(current).norm();
        if residual <= config.fixed_tol {
            trace.push(format!("{}: already fixed", f.label()));
            steps.push(StepRecord {
                map: f.label().to_string(),
                case: StepCase::AlreadyFixed,
                start: current,
                point: current,
                residual,
                return_time: None,
                index: None,
            });
            fixers.push(f.clone());
            continue;
        }

        let local = if i == 0 {
            samples.clone()
        } else {
            sample_orbit(&f_family[i..], current, config.orbit_samples, config.domain, config.seed)
                .map_err(|e| fail(&mut trace, e.to_string()))?
        };
        if let Some(point) = closure_fixed_point(f, &fixers, &local, config) {
            let residual = f.displacement(point).norm();
            trace.push(format!("{}: fixed point {point} in the orbit closure", f.label()));
            steps.push(StepRecord {
                map: f.label().to_string(),
                case: StepCase::OrbitClosure,
                start: current,
                point,
                residual,
                return_time: None,
                index: None,
            });
            current = point;
            fixers.push(f.clone());
            continue;
        }

        let cert = find_capital_point(f, &fixers, current, &config.capital())
            .map_err(|e| fail(&mut trace, format!("{}: {e}", f.label())))?;
        trace.push(format!("{}: capital point {} (n = {})", f.label(), cert.point, cert.located_with));
        steps.push(StepRecord {
            map: f.label().to_string(),
            case: StepCase::CapitalPoint,
            start: current,
            point: cert.point,
            residual: cert.residual,
            return_time: Some(cert.located_with),
            index: cert.indices.first().copied(),
        });
        current = cert.point;
        fixers.push(f.clone());
    }

    let q = current;
    let residuals: Vec<MapResidual> = all
        .iter()
        .map(|m| MapResidual {
            label: m.label().to_string(),
            residual: m.displacement(q).norm(),
        })
        .collect();
    if let Some(bad) = residuals.iter().find(|r| !(r.residual < config.fixed_tol)) {
        trace.push(format!("{} moves {q} by {:e}", bad.label, bad.residual));
        return Err(DynamicsError::LocalizationFailure {
            step: f_family.len(),
            trace,
        });
    }
    let hull = convex_hull(&samples, config.fixed_tol)?;
    let hull_membership = point_in_hull(&hull, q, config.fixed_tol);
    if hull_membership == HullMembership::Outside {
        trace.push(format!("{q} lies outside the hull of the sampled orbit"));
        return Err(DynamicsError::LocalizationFailure {
            step: f_family.len(),
            trace,
        });
    }
    Ok(TheoremCertificate {
        generators: all.iter().map(DiffeoMap::descriptor).collect(),
        fixed_count: g_fixed.len(),
        seed: p,
        fixed_point: q,
        residuals,
        hull_margin: -hull.signed_distance(q),
        hull,
        hull_membership,
        orbit_samples: samples.len(),
        commutator_residual,
        steps,
    })
}

/// A polished fixed point of `f` near the least displaced orbit sample, if
/// that sample is almost fixed and the result is fixed by all `fixers`.
fn closure_fixed_point(f: &DiffeoMap, fixers: &[DiffeoMap], samples: &[Point2], config: &TheoremConfig) -> Option<Point2> {
    let (d, x) = samples
        .iter()
        .map(|&x| (f.displacement(x).norm(), x))
        .min_by(|a, b| a.0.total_cmp(&b.0))?;
    if !(d < config.closure_tol) {
        return None;
    }
    let y = newton_fixed_point(f, x, 50)?;
    let ok = f.displacement(y).norm() < config.fixed_tol
        && fixers.iter().all(|g| g.displacement(y).norm() < config.fixed_tol);
    ok.then_some(y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationEntry {
    pub ell: i64,
    pub point: Option<Point2>,
    pub residual: f64,
    pub hull_margin: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub entries: Vec<LocalizationEntry>,
    pub hull: ConvexPolygon,
    pub passed: bool,
}

/// Checks that `h^ell(q)` is fixed by `f` and lies in the hull of the sampled
/// orbit of `p` under `f`, `h` and their inverses, for each `ell` in `ells`.
pub fn verify_orbit_localization(
    h: &DiffeoMap,
    f: &DiffeoMap,
    q: Point2,
    p: Point2,
    ells: RangeInclusive<i64>,
    config: &TheoremConfig,
) -> Result<LocalizationReport, DynamicsError> {
    let mut samples = sample_orbit(&[f.clone(), h.clone()], p, config.orbit_samples, config.domain, config.seed)?;
    let backward = config.orbit_samples / 4;
    for m in [f, h] {
        let mut x = p;
        for _ in 0..backward {
            match m.inverse(x) {
                Some(y) if y.is_finite() && config.domain.contains(y) => {
                    x = y;
                    samples.push(y);
                }
                _ => break,
            }
        }
    }
    let hull = convex_hull(&samples, config.fixed_tol)?;
    let power = |k: i64| -> Option<Point2> {
        let mut x = q;
        for _ in 0..k.unsigned_abs() {
            x = if k >= 0 { h.eval(x) } else { h.inverse(x)? };
        }
        Some(x)
    };
    let entries: Vec<LocalizationEntry> = ells
        .map(|ell| match power(ell) {
            Some(x) => {
                let residual = f.displacement(x).norm();
                let hull_margin = -hull.signed_distance(x);
                LocalizationEntry {
                    ell,
                    point: Some(x),
                    residual,
                    hull_margin,
                    passed: residual < config.fixed_tol && hull_margin >= -config.fixed_tol,
                }
            }
            None => LocalizationEntry {
                ell,
                point: None,
                residual: f64::INFINITY,
                hull_margin: f64::NEG_INFINITY,
                passed: false,
            },
        })
        .collect();
    let passed = entries.iter().all(|e| e.passed);
    Ok(LocalizationReport { entries, hull, passed })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::dynamics::{Mat2, MapSpec};

    fn config() -> TheoremConfig {
        TheoremConfig {
            orbit_samples: 2_000,
            ..TheoremConfig::default()
        }
    }

    #[test]
    fn two_rotations_share_center() {
        let c = Point2::new(0.3, 0.2);
        let fs = [DiffeoMap::rotation(c, TAU / 40.0), DiffeoMap::rotation(c, 3.0 * TAU / 50.0)];
        let cert = locate_common_fixed_point(&[], &fs, Point2::new(0.5, 0.1), &config()).unwrap();
        assert!(cert.fixed_point.distance(c) < 1e-9);
        assert_eq!(cert.hull_membership, HullMembership::Inside);
        assert_eq!(cert.steps[0].case, StepCase::CapitalPoint);
        assert_eq!(cert.steps[1].case, StepCase::AlreadyFixed);
    }

    #[test]
    fn seed_already_common_fixed_point() {
        let c = Point2::new(0.3, 0.2);
        let g = DiffeoMap::rotation(c, 0.1);
        let f = DiffeoMap::from_spec(MapSpec::Conjugate {
            map: Box::new(MapSpec::Rotation { center: c, angle: 0.05 }),
            by: Box::new(MapSpec::Identity),
        })
        .unwrap();
        let cert = locate_common_fixed_point(&[g], &[f], c, &config()).unwrap();
        assert_eq!(cert.fixed_point, c);
        assert_eq!(cert.steps[0].case, StepCase::AlreadyFixed);
    }

    #[test]
    fn spiral_flow_pair() {
        let c = Point2::new(-0.2, 0.4);
        let m = Mat2::new(-0.2, -1.0, 1.0, -0.2);
        let flow = |time| {
            DiffeoMap::from_spec(MapSpec::LinearFlow {
                generator: m,
                time,
                center: c,
            })
            .unwrap()
        };
        let cert = locate_common_fixed_point(&[], &[flow(0.05), flow(0.08)], Point2::new(0.3, 0.4), &config()).unwrap();
        assert!(cert.fixed_point.distance(c) < 1e-9);
        assert_eq!(cert.steps[0].case, StepCase::OrbitClosure);
    }

    #[test]
    fn non_commuting_pair_rejected() {
        let fs = [DiffeoMap::rotation(Point2::ORIGIN, 0.1), DiffeoMap::rotation(Point2::new(1.0, 0.0), 0.1)];
        assert!(matches!(
            locate_common_fixed_point(&[], &fs, Point2::new(0.5, 0.0), &config()),
            Err(DynamicsError::CommutationViolation { .. })
        ));
    }

    #[test]
    fn translation_orbit_unbounded() {
        let fs = [DiffeoMap::translation(Point2::new(0.1, 0.0))];
        assert!(matches!(
            locate_common_fixed_point(&[], &fs, Point2::ORIGIN, &config()),
            Err(DynamicsError::UnboundedOrbit { .. })
        ));
    }

    #[test]
    fn orbit_localization_rotations() {
        let c = Point2::new(0.3, 0.2);
        let f = DiffeoMap::rotation(c, TAU / 9.0);
        let h = DiffeoMap::rotation(c, 0.2);
        let r = verify_orbit_localization(&h, &f, c, Point2::new(1.0, 0.0), -5..=5, &config()).unwrap();
        assert!(r.passed);
        let id = verify_orbit_localization(&DiffeoMap::identity(), &f, c, Point2::new(1.0, 0.0), 0..=3, &config()).unwrap();
        assert!(id.passed);
    }
}
