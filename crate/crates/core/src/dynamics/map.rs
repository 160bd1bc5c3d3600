use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bump::{bump, smooth_step};
use super::counterexample::PushMap;
use super::{DynamicsError, Mat2};
use crate::geom::Point2;

/// Central finite-difference step for Jacobians.
pub const FD_STEP: f64 = 1e-6;

/// A planar map. Implementations must be pure functions.
pub trait PlanarMap: Send + Sync {
    fn eval(&self, x: Point2) -> Point2;

    /// Analytic Jacobian, if known.
    fn jacobian(&self, _x: Point2) -> Option<Mat2> {
        None
    }

    fn inverse(&self, _x: Point2) -> Option<Point2> {
        None
    }
}

/// Built-in parametric maps, addressable by name and parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    Identity,
    Rotation {
        #[serde(default)]
        center: Point2,
        angle: f64,
    },
    Translation {
        offset: Point2,
    },
    /// `x -> matrix x + offset`.
    Affine {
        matrix: Mat2,
        #[serde(default)]
        offset: Point2,
    },
    /// Time-`time` flow of `x' = generator (x - center)`.
    LinearFlow {
        generator: Mat2,
        time: f64,
        #[serde(default)]
        center: Point2,
    },
    /// Rotation of each circle `|x| = r` by `(2 pi / n)(1 - step(r - 1))`.
    BumpRotation {
        n: u32,
    },
    /// `psi o f_n o psi^-1` with `psi(0) = q` supported in a thin tube around `[0, q]`.
    Counterexample {
        n: u32,
        p: Point2,
        q: Point2,
        support_radius: f64,
    },
    /// `(x, y) -> (contraction x, y + amplitude sin(frequency x))`.
    SineShear {
        contraction: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// Identity outside the disk; inside, `x + bump(|x - center| / radius) offset`.
    BumpTranslation {
        center: Point2,
        radius: f64,
        offset: Point2,
    },
    /// Applies `maps` in listed order.
    Compose {
        maps: Vec<MapSpec>,
    },
    /// `by o map o by^-1`.
    Conjugate {
        map: Box<MapSpec>,
        by: Box<MapSpec>,
    },
}

impl MapSpec {
    pub fn label(&self) -> String {
        match self {
            MapSpec::Identity => "identity".into(),
            MapSpec::Rotation { center, angle } => format!("rotation(center={center}, angle={angle})"),
            MapSpec::Translation { offset } => format!("translation({offset})"),
            MapSpec::Affine { matrix, offset } => format!("affine({:?}, {offset})", <[[f64; 2]; 2]>::from(*matrix)),
            MapSpec::LinearFlow { generator, time, center } => format!(
                "flow(generator={:?}, time={time}, center={center})",
                <[[f64; 2]; 2]>::from(*generator)
            ),
            MapSpec::BumpRotation { n } => format!("bump_rotation(n={n})"),
            MapSpec::Counterexample { n, p, q, .. } => format!("counterexample(n={n}, p={p}, q={q})"),
            MapSpec::SineShear { contraction, amplitude, frequency } => {
                format!("sine_shear({contraction}, {amplitude}, {frequency})")
            }
            MapSpec::BumpTranslation { center, radius, offset } => {
                format!("bump_translation(center={center}, radius={radius}, offset={offset})")
            }
            MapSpec::Compose { maps } => {
                let parts: Vec<String> = maps.iter().map(|m| m.label()).collect();
                format!("compose[{}]", parts.join(", "))
            }
            MapSpec::Conjugate { map, by } => format!("conjugate({} by {})", map.label(), by.label()),
        }
    }
}

/// A planar map with label and optional registry description.
#[derive(Clone)]
pub struct DiffeoMap {
    label: String,
    spec: Option<MapSpec>,
    inner: Arc<dyn PlanarMap>,
}

/// Serializable description of a [`DiffeoMap`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDescriptor {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<MapSpec>,
}

impl fmt::Debug for DiffeoMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffeoMap").field("label", &self.label).finish()
    }
}

impl Serialize for DiffeoMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.descriptor().serialize(s)
    }
}

impl DiffeoMap {
    pub fn custom(label: impl Into<String>, map: impl PlanarMap + 'static) -> Self {
        DiffeoMap {
            label: label.into(),
            spec: None,
            inner: Arc::new(map),
        }
    }

    pub fn from_spec(spec: MapSpec) -> Result<Self, DynamicsError> {
        let inner: Arc<dyn PlanarMap> = match &spec {
            MapSpec::Identity => Arc::new(Affine::new(Mat2::IDENTITY, Point2::ORIGIN)?),
            MapSpec::Rotation { center, angle } => {
                let m = Mat2::rotation(*angle);
                Arc::new(Affine::new(m, *center - m.apply(*center))?)
            }
            MapSpec::Translation { offset } => Arc::new(Affine::new(Mat2::IDENTITY, *offset)?),
            MapSpec::Affine { matrix, offset } => Arc::new(Affine::new(*matrix, *offset)?),
            MapSpec::LinearFlow { generator, time, center } => {
                let m = (*generator * *time).exp();
                Arc::new(Affine::new(m, *center - m.apply(*center))?)
            }
            MapSpec::BumpRotation { n } => Arc::new(BumpRotation::new(*n)?),
            MapSpec::Counterexample { n, p, q, support_radius } => {
                let f = Arc::new(BumpRotation::new(*n)?);
                let psi = Arc::new(PushMap::new(*p, *q, *support_radius)?);
                Arc::new(Conjugated { map: f, by: psi })
            }
            MapSpec::SineShear { contraction, amplitude, frequency } => {
                if *contraction == 0.0 {
                    return Err(DynamicsError::InvalidParameter("contraction must be nonzero".into()));
                }
                Arc::new(SineShear {
                    c: *contraction,
                    a: *amplitude,
                    w: *frequency,
                })
            }
            MapSpec::BumpTranslation { center, radius, offset } => {
                if !(*radius > 0.0) {
                    return Err(DynamicsError::InvalidParameter("radius must be positive".into()));
                }
                Arc::new(BumpTranslation {
                    center: *center,
                    radius: *radius,
                    offset: *offset,
                })
            }
            MapSpec::Compose { maps } => {
                let parts = maps.iter().cloned().map(DiffeoMap::from_spec).collect::<Result<Vec<_>, _>>()?;
                Arc::new(Compose { parts })
            }
            MapSpec::Conjugate { map, by } => {
                let f = DiffeoMap::from_spec((**map).clone())?;
                let t = DiffeoMap::from_spec((**by).clone())?;
                if t.inverse(Point2::ORIGIN).is_none() {
                    return Err(DynamicsError::InvalidParameter("conjugating map has no inverse".into()));
                }
                Arc::new(Conjugated {
                    map: f.inner,
                    by: t.inner,
                })
            }
        };
        Ok(DiffeoMap {
            label: spec.label(),
            spec: Some(spec),
            inner,
        })
    }

    pub fn identity() -> Self {
        DiffeoMap::from_spec(MapSpec::Identity).expect("identity")
    }

    pub fn rotation(center: Point2, angle: f64) -> Self {
        DiffeoMap::from_spec(MapSpec::Rotation { center, angle }).expect("rotation")
    }

    pub fn translation(offset: Point2) -> Self {
        DiffeoMap::from_spec(MapSpec::Translation { offset }).expect("translation")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn spec(&self) -> Option<&MapSpec> {
        self.spec.as_ref()
    }

    pub fn descriptor(&self) -> MapDescriptor {
        MapDescriptor {
            label: self.label.clone(),
            spec: self.spec.clone(),
        }
    }

    #[inline]
    pub fn eval(&self, x: Point2) -> Point2 {
        self.inner.eval(x)
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.inner.jacobian(Point2::ORIGIN).is_some()
    }

    /// Analytic Jacobian when available, else central differences.
    pub fn jacobian(&self, x: Point2) -> Mat2 {
        self.inner.jacobian(x).unwrap_or_else(|| self.fd_jacobian(x, FD_STEP))
    }

    pub fn fd_jacobian(&self, x: Point2, h: f64) -> Mat2 {
        let ex = Point2::new(h, 0.0);
        let ey = Point2::new(0.0, h);
        let cx = (self.eval(x + ex) - self.eval(x - ex)) * (0.5 / h);
        let cy = (self.eval(x + ey) - self.eval(x - ey)) * (0.5 / h);
        Mat2::from_columns(cx, cy)
    }

    pub fn inverse(&self, x: Point2) -> Option<Point2> {
        self.inner.inverse(x)
    }

    pub fn iterate(&self, x: Point2, k: usize) -> Point2 {
        (0..k).fold(x, |y, _| self.eval(y))
    }

    pub fn displacement(&self, x: Point2) -> Point2 {
        self.eval(x) - x
    }

    /// Largest relative difference between the analytic and the
    /// finite-difference Jacobian over `points`; `None` without an analytic one.
    pub fn jacobian_consistency(&self, points: &[Point2]) -> Option<f64> {
        if !self.has_analytic_jacobian() {
            return None;
        }
        let worst = points
            .iter()
            .map(|&x| {
                let a = self.jacobian(x);
                let f = self.fd_jacobian(x, FD_STEP);
                a.max_abs_diff(&f) / a.op_norm().max(1.0)
            })
            .fold(0.0, f64::max);
        Some(worst)
    }
}

struct Affine {
    m: Mat2,
    m_inv: Mat2,
    b: Point2,
}

impl Affine {
    fn new(m: Mat2, b: Point2) -> Result<Self, DynamicsError> {
        let m_inv = m
            .inverse()
            .ok_or_else(|| DynamicsError::InvalidParameter("singular linear part".into()))?;
        Ok(Affine { m, m_inv, b })
    }
}

impl PlanarMap for Affine {
    fn eval(&self, x: Point2) -> Point2 {
        self.m.apply(x) + self.b
    }

    fn jacobian(&self, _x: Point2) -> Option<Mat2> {
        Some(self.m)
    }

    fn inverse(&self, x: Point2) -> Option<Point2> {
        Some(self.m_inv.apply(x - self.b))
    }
}

/// `f_n`: rotates the circle of radius `r` by `phi_n(r)`.
pub(crate) struct BumpRotation {
    n: u32,
}

impl BumpRotation {
    pub(crate) fn new(n: u32) -> Result<Self, DynamicsError> {
        if n < 2 {
            return Err(DynamicsError::InvalidParameter("n must be at least 2".into()));
        }
        Ok(BumpRotation { n })
    }

    /// `phi_n(r)` and its derivative.
    pub(crate) fn phi(&self, r: f64) -> (f64, f64) {
        let (s, ds) = smooth_step(r - 1.0);
        let top = TAU / self.n as f64;
        (top * (1.0 - s), -top * ds)
    }
}

impl PlanarMap for BumpRotation {
    fn eval(&self, x: Point2) -> Point2 {
        x.rotated(self.phi(x.norm()).0)
    }

    fn jacobian(&self, x: Point2) -> Option<Mat2> {
        let r = x.norm();
        let (phi, dphi) = self.phi(r);
        let rot = Mat2::rotation(phi);
        if r == 0.0 || dphi == 0.0 {
            return Some(rot);
        }
        // D(R(phi(r)) x) = R(phi) + phi'(r) (J R(phi) x) x^T / r
        let jrx = rot.apply(x).perp();
        Some(rot + Mat2::outer(jrx, x) * (dphi / r))
    }

    fn inverse(&self, x: Point2) -> Option<Point2> {
        Some(x.rotated(-self.phi(x.norm()).0))
    }
}

struct SineShear {
    c: f64,
    a: f64,
    w: f64,
}

impl PlanarMap for SineShear {
    fn eval(&self, x: Point2) -> Point2 {
        Point2::new(self.c * x.x, x.y + self.a * (self.w * x.x).sin())
    }

    fn jacobian(&self, x: Point2) -> Option<Mat2> {
        Some(Mat2::new(self.c, 0.0, self.a * self.w * (self.w * x.x).cos(), 1.0))
    }

    fn inverse(&self, x: Point2) -> Option<Point2> {
        let u = x.x / self.c;
        Some(Point2::new(u, x.y - self.a * (self.w * u).sin()))
    }
}

struct BumpTranslation {
    center: Point2,
    radius: f64,
    offset: Point2,
}

impl PlanarMap for BumpTranslation {
    fn eval(&self, x: Point2) -> Point2 {
        let u = (x - self.center).norm() / self.radius;
        x + self.offset * bump(u).0
    }

    fn jacobian(&self, x: Point2) -> Option<Mat2> {
        let d = x - self.center;
        let r = d.norm();
        let u = r / self.radius;
        let db = bump(u).1;
        if r == 0.0 || db == 0.0 {
            return Some(Mat2::IDENTITY);
        }
        Some(Mat2::IDENTITY + Mat2::outer(self.offset, d) * (db / (self.radius * r)))
    }
}

struct Compose {
    parts: Vec<DiffeoMap>,
}

impl PlanarMap for Compose {
    fn eval(&self, x: Point2) -> Point2 {
        self.parts.iter().fold(x, |y, m| m.eval(y))
    }

    fn jacobian(&self, x: Point2) -> Option<Mat2> {
        let mut y = x;
        let mut j = Mat2::IDENTITY;
        for m in &self.parts {
            j = m.inner.jacobian(y)? * j;
            y = m.eval(y);
        }
        Some(j)
    }

    fn inverse(&self, x: Point2) -> Option<Point2> {
        self.parts.iter().rev().try_fold(x, |y, m| m.inverse(y))
    }
}

/// `by o map o by^-1`.
pub(crate) struct Conjugated {
    pub(crate) map: Arc<dyn PlanarMap>,
    pub(crate) by: Arc<dyn PlanarMap>,
}

impl PlanarMap for Conjugated {
    fn eval(&self, x: Point2) -> Point2 {
        let y = self.by.inverse(x).expect("invertible conjugacy");
        self.by.eval(self.map.eval(y))
    }

    fn jacobian(&self, x: Point2) -> Option<Mat2> {
        let y = self.by.inverse(x)?;
        let fy = self.map.eval(y);
        let jt_out = self.by.jacobian(fy)?;
        let jf = self.map.jacobian(y)?;
        let jt_in = self.by.jacobian(y)?.inverse()?;
        Some(jt_out * jf * jt_in)
    }

    fn inverse(&self, x: Point2) -> Option<Point2> {
        let y = self.by.inverse(x)?;
        Some(self.by.eval(self.map.inverse(y)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sample_points() -> Vec<Point2> {
        (0..40)
            .map(|k| Point2::from_polar(0.1 + 0.07 * k as f64, 1.3 * k as f64))
            .collect()
    }

    #[test]
    fn analytic_jacobians_agree_with_differences() {
        let specs = vec![
            MapSpec::Rotation {
                center: Point2::new(0.3, 0.2),
                angle: 0.4,
            },
            MapSpec::LinearFlow {
                generator: Mat2::new(-0.1, -1.0, 1.0, -0.1),
                time: 0.3,
                center: Point2::new(1.0, -1.0),
            },
            MapSpec::BumpRotation { n: 8 },
            MapSpec::SineShear {
                contraction: 0.05,
                amplitude: 0.3,
                frequency: PI,
            },
            MapSpec::BumpTranslation {
                center: Point2::new(0.5, 0.5),
                radius: 1.0,
                offset: Point2::new(0.05, 0.0),
            },
            MapSpec::Counterexample {
                n: 8,
                p: Point2::new(0.5, 0.0),
                q: Point2::new(0.3, 0.4),
                support_radius: 0.03,
            },
            MapSpec::Conjugate {
                map: Box::new(MapSpec::Rotation {
                    center: Point2::ORIGIN,
                    angle: 0.2,
                }),
                by: Box::new(MapSpec::Affine {
                    matrix: Mat2::new(1.2, 0.3, -0.1, 0.9),
                    offset: Point2::new(0.5, 0.1),
                }),
            },
        ];
        for spec in specs {
            let m = DiffeoMap::from_spec(spec).unwrap();
            let err = m.jacobian_consistency(&sample_points()).unwrap();
            assert!(err < 1e-4, "{}: {err}", m.label());
        }
    }

    #[test]
    fn inverses_roundtrip() {
        let specs = vec![
            MapSpec::BumpRotation { n: 5 },
            MapSpec::SineShear {
                contraction: 0.5,
                amplitude: 0.3,
                frequency: 2.0,
            },
            MapSpec::Counterexample {
                n: 4,
                p: Point2::new(0.5, 0.0),
                q: Point2::new(0.3, 0.4),
                support_radius: 0.03,
            },
            MapSpec::Compose {
                maps: vec![
                    MapSpec::Translation {
                        offset: Point2::new(1.0, 2.0),
                    },
                    MapSpec::Rotation {
                        center: Point2::ORIGIN,
                        angle: 1.0,
                    },
                ],
            },
        ];
        for spec in specs {
            let m = DiffeoMap::from_spec(spec).unwrap();
            for x in sample_points() {
                let back = m.inverse(m.eval(x)).unwrap();
                assert!(back.approx_eq(x, 1e-12), "{}: {x} -> {back}", m.label());
            }
        }
    }

    #[test]
    fn bump_rotation_profile() {
        let f = BumpRotation::new(8).unwrap();
        assert_eq!(f.phi(0.5).0, PI / 4.0);
        assert_eq!(f.phi(2.5).0, 0.0);
        let x = Point2::new(3.0, 1.0);
        assert_eq!(f.eval(x), x);
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec = MapSpec::Rotation {
            center: Point2::new(0.3, 0.2),
            angle: 0.1,
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"kind":"rotation","center":[0.3,0.2],"angle":0.1}"#);
        let back: MapSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
