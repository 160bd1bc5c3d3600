//! Named curves and maps used by tests, benchmarks and the command line.

use crate::dynamics::{DiffeoMap, Mat2, MapSpec};
use crate::geom::{ClosedPolyCurve, Point2, DEFAULT_TOLERANCE};

/// The triangle `(-1,0), (1,0), (0,2)` described twice counter-clockwise.
pub fn triangle_twice() -> ClosedPolyCurve {
    ClosedPolyCurve::from_coords(
        &[(-1., 0.), (1., 0.), (0., 2.), (-1., 0.), (1., 0.), (0., 2.)],
        DEFAULT_TOLERANCE,
    )
    .expect("valid curve")
}

pub fn unit_square() -> ClosedPolyCurve {
    ClosedPolyCurve::from_coords(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)], DEFAULT_TOLERANCE).expect("valid curve")
}

/// The unit square centered at the origin, counter-clockwise.
pub fn centered_unit_square() -> ClosedPolyCurve {
    ClosedPolyCurve::from_coords(&[(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)], DEFAULT_TOLERANCE)
        .expect("valid curve")
}

/// Self-crossing at `(1, 1)` with a right angle.
pub fn bowtie() -> ClosedPolyCurve {
    ClosedPolyCurve::from_coords(&[(0., 0.), (2., 2.), (2., 0.), (0., 2.)], DEFAULT_TOLERANCE).expect("valid curve")
}

/// Vertices `a_1, ..., a_10` of a ten-vertex curve with exactly three
/// transversal crossings, all at angles below a right angle:
/// `b_1 = [a_6,a_7] x [a_9,a_10]`, `b_2 = [a_3,a_4] x [a_8,a_9]`,
/// `b_3 = [a_4,a_5] x [a_9,a_10]`.
pub const TEN_VERTEX: [(f64, f64); 10] = [
    (2., 10.),
    (19., 30.),
    (40., 19.),
    (26., 12.),
    (14., 20.),
    (14., 16.),
    (28., -6.),
    (42., 4.),
    (29., 21.),
    (8., -2.),
];

pub fn ten_vertex() -> ClosedPolyCurve {
    ClosedPolyCurve::from_coords(&TEN_VERTEX, DEFAULT_TOLERANCE).expect("valid curve")
}

/// Vertex `a_i` (1-based) of [`TEN_VERTEX`].
pub fn ten_vertex_a(i: usize) -> Point2 {
    TEN_VERTEX[i - 1].into()
}

/// A shipped example map with a seed point for orbit checks.
#[derive(Clone, Debug)]
pub struct ExampleMap {
    pub name: &'static str,
    pub spec: MapSpec,
    pub seed: Point2,
}

impl ExampleMap {
    pub fn map(&self) -> DiffeoMap {
        DiffeoMap::from_spec(self.spec.clone()).expect("valid example map")
    }
}

/// Maps near the identity on the unit-scale domain `[-1, 1]^2`.
pub fn example_maps() -> Vec<ExampleMap> {
    let rot = |center: (f64, f64), angle: f64| MapSpec::Rotation {
        center: center.into(),
        angle,
    };
    vec![
        ExampleMap {
            name: "small_rotation",
            spec: rot((0.3, 0.2), 0.02),
            seed: Point2::new(0.9, 0.1),
        },
        ExampleMap {
            name: "rotation_period_200",
            spec: rot((0.0, 0.0), std::f64::consts::TAU / 200.0),
            seed: Point2::new(0.5, 0.0),
        },
        ExampleMap {
            name: "spiral_flow",
            spec: MapSpec::LinearFlow {
                generator: Mat2::new(-0.1, -1.0, 1.0, -0.1),
                time: 0.02,
                center: Point2::new(-0.2, 0.1),
            },
            seed: Point2::new(0.5, 0.3),
        },
        ExampleMap {
            name: "elliptic_flow",
            spec: MapSpec::LinearFlow {
                generator: Mat2::new(0.0, -1.0, 2.0, 0.0),
                time: 0.01,
                center: Point2::ORIGIN,
            },
            seed: Point2::new(0.4, 0.0),
        },
        ExampleMap {
            name: "near_identity_affine",
            spec: MapSpec::Affine {
                matrix: Mat2::new(1.01, 0.005, -0.004, 0.995),
                offset: Point2::new(0.002, -0.001),
            },
            seed: Point2::new(0.5, 0.5),
        },
        ExampleMap {
            name: "small_translation",
            spec: MapSpec::Translation {
                offset: Point2::new(0.01, 0.005),
            },
            seed: Point2::ORIGIN,
        },
        ExampleMap {
            name: "conjugated_rotation",
            spec: MapSpec::Conjugate {
                map: Box::new(rot((0.1, -0.1), 0.015)),
                by: Box::new(MapSpec::Affine {
                    matrix: Mat2::new(1.2, 0.1, 0.0, 0.9),
                    offset: Point2::new(0.1, 0.0),
                }),
            },
            seed: Point2::new(-0.6, 0.4),
        },
        ExampleMap {
            name: "bump_translation",
            spec: MapSpec::BumpTranslation {
                center: Point2::ORIGIN,
                radius: 0.8,
                offset: Point2::new(0.01, 0.0),
            },
            seed: Point2::new(0.1, 0.0),
        },
        ExampleMap {
            name: "bump_rotation_400",
            spec: MapSpec::BumpRotation { n: 400 },
            seed: Point2::new(0.5, 0.0),
        },
    ]
}
