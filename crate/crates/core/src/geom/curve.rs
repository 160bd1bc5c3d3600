use serde::{Deserialize, Serialize};

use super::{BoundingBox, GeomError, OrientedSegment, Point2, DEFAULT_TOLERANCE};

/// The closed oriented polygonal curve through `a_1, ..., a_n`, closed by
/// the segment `[a_n, a_1]`.
///
/// Vertices need not be distinct, only cyclically consecutive ones must
/// differ. A curve may therefore pass several times through the same point
/// or run along the same segment more than once.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedPolyCurve {
    vertices: Vec<Point2>,
    tolerance: f64,
}

/// On-disk form of a curve: `{"vertices": [[x, y], ...], "tolerance": t}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveFile {
    pub vertices: Vec<Point2>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

impl<'de> Deserialize<'de> for ClosedPolyCurve {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = CurveFile::deserialize(deserializer)?;
        build_closed_curve(file.vertices, file.tolerance).map_err(serde::de::Error::custom)
    }
}

/// Validates and builds a closed curve from its cyclic vertex list.
pub fn build_closed_curve(
    vertices: Vec<Point2>,
    tolerance: f64,
) -> Result<ClosedPolyCurve, GeomError> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(GeomError::InvalidTolerance(tolerance));
    }
    if vertices.len() < 2 {
        return Err(GeomError::TooFewVertices(vertices.len()));
    }
    for p in &vertices {
        Point2::try_new(p.x, p.y)?;
    }
    let n = vertices.len();
    for i in 0..n {
        if vertices[i].approx_eq(vertices[(i + 1) % n], tolerance) {
            return Err(GeomError::ConsecutiveDuplicate(i));
        }
    }
    Ok(ClosedPolyCurve {
        vertices,
        tolerance,
    })
}

impl ClosedPolyCurve {
    pub fn new(vertices: Vec<Point2>, tolerance: f64) -> Result<Self, GeomError> {
        build_closed_curve(vertices, tolerance)
    }

    pub fn from_coords(coords: &[(f64, f64)], tolerance: f64) -> Result<Self, GeomError> {
        build_closed_curve(coords.iter().map(|&c| c.into()).collect(), tolerance)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> Point2 {
        self.vertices[i % self.vertices.len()]
    }

    /// The composing segment `[a_i, a_{i+1}]` (indices mod n).
    pub fn segment(&self, i: usize) -> OrientedSegment {
        let n = self.vertices.len();
        OrientedSegment::new_unchecked(self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn segments(&self) -> impl Iterator<Item = OrientedSegment> + '_ {
        (0..self.vertices.len()).map(move |i| self.segment(i))
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::from_points(self.vertices.iter().copied()).expect("n >= 2")
    }

    pub fn with_tolerance(&self, tolerance: f64) -> Result<Self, GeomError> {
        build_closed_curve(self.vertices.clone(), tolerance)
    }

    /// Same support traversed in the opposite direction.
    pub fn reversed(&self) -> ClosedPolyCurve {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        ClosedPolyCurve {
            vertices,
            tolerance: self.tolerance,
        }
    }

    /// Shoelace signed area; positive for counter-clockwise simple curves.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let origin = self.vertices[0];
        let mut acc = 0.0;
        for i in 0..n {
            let a = self.vertices[i] - origin;
            let b = self.vertices[(i + 1) % n] - origin;
            acc += a.cross(b);
        }
        0.5 * acc
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|s| s.length()).sum()
    }

    /// Smallest distance from `p` to the support of the curve.
    pub fn distance_to_point(&self, p: Point2) -> f64 {
        self.segments()
            .map(|s| s.distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Drops vertices where the curve continues straight on, within tolerance.
    pub fn without_collinear_vertices(&self) -> ClosedPolyCurve {
        let mut verts = self.vertices.clone();
        let tol = self.tolerance;
        let mut changed = true;
        while changed && verts.len() > 3 {
            changed = false;
            let n = verts.len();
            for i in 0..n {
                let prev = verts[(i + n - 1) % n];
                let cur = verts[i];
                let next = verts[(i + 1) % n];
                let seg = OrientedSegment::new_unchecked(prev, next);
                let forward = (cur - prev).dot(next - cur) > 0.0;
                if forward && seg.distance_to_point(cur) <= tol {
                    verts.remove(i);
                    changed = true;
                    break;
                }
            }
        }
        ClosedPolyCurve {
            vertices: verts,
            tolerance: tol,
        }
    }

    pub fn to_file(&self) -> CurveFile {
        CurveFile {
            vertices: self.vertices.clone(),
            tolerance: self.tolerance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn triangle_is_valid() {
        let c = build_closed_curve(vec![p(-1.0, 0.0), p(1.0, 0.0), p(0.0, 2.0)], 1e-9).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.segment(2).end, p(-1.0, 0.0));
        assert!((c.signed_area() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn consecutive_duplicate_rejected() {
        let err = build_closed_curve(vec![p(0.0, 0.0), p(0.0, 0.0), p(1.0, 1.0)], 1e-9);
        assert_eq!(err, Err(GeomError::ConsecutiveDuplicate(0)));
    }

    #[test]
    fn closing_duplicate_rejected() {
        let err = build_closed_curve(vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 0.0)], 1e-9);
        assert_eq!(err, Err(GeomError::ConsecutiveDuplicate(2)));
    }

    #[test]
    fn triangle_twice_is_valid() {
        let v = vec![
            p(-1.0, 0.0),
            p(1.0, 0.0),
            p(0.0, 2.0),
            p(-1.0, 0.0),
            p(1.0, 0.0),
            p(0.0, 2.0),
        ];
        let c = build_closed_curve(v.clone(), 1e-9).unwrap();
        assert_eq!(c.vertices(), &v[..]);
    }

    #[test]
    fn non_finite_and_short_rejected() {
        assert!(matches!(
            build_closed_curve(vec![p(f64::NAN, 0.0), p(1.0, 0.0)], 1e-9),
            Err(GeomError::NonFiniteCoordinate { .. })
        ));
        assert_eq!(
            build_closed_curve(vec![p(0.0, 0.0)], 1e-9),
            Err(GeomError::TooFewVertices(1))
        );
    }

    #[test]
    fn json_schema_roundtrip() {
        let json = r#"{"vertices": [[0,0],[1,0],[1,1]], "tolerance": 1e-9}"#;
        let c: ClosedPolyCurve = serde_json::from_str(json).unwrap();
        assert_eq!(c.len(), 3);
        let back = serde_json::to_string(&c).unwrap();
        assert_eq!(back, r#"{"vertices":[[0.0,0.0],[1.0,0.0],[1.0,1.0]],"tolerance":1e-9}"#);
        let bad = r#"{"vertices": [[0,0],[0,0],[1,1]], "tolerance": 1e-9}"#;
        assert!(serde_json::from_str::<ClosedPolyCurve>(bad).is_err());
    }

    #[test]
    fn collinear_vertices_dropped() {
        let c = build_closed_curve(
            vec![p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0), p(2.0, 2.0), p(0.0, 2.0)],
            1e-9,
        )
        .unwrap();
        assert_eq!(c.without_collinear_vertices().len(), 4);
    }
}
