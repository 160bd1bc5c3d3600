//! Plane geometry: points, segments, closed polygonal curves, intersection
//! predicates, preprocessing and convex hulls.

mod curve;
mod hull;
mod intersect;
mod point;
mod preprocess;

use thiserror::Error;

pub use curve::{build_closed_curve, ClosedPolyCurve, CurveFile};
pub use hull::{convex_hull, point_in_hull, ConvexPolygon, HullMembership};
pub use intersect::{angle_between, candidate_pairs, segment_intersection, IntersectionKind, IntersectionResult};
pub use point::{BoundingBox, OrientedSegment, Point2, DEFAULT_TOLERANCE};
pub use preprocess::{
    separate_overlaps, separate_overlaps_tracked, subdivide_at_intersections, subdivide_tracked,
    validate_angle_hypothesis, AngleViolation, Detour, DetourHalf, SegmentOrigin, TrackedCurve,
};
pub(crate) use preprocess::VertexPool;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("non-finite coordinate ({x}, {y})")]
    NonFiniteCoordinate { x: f64, y: f64 },
    #[error("degenerate segment {start} -> {end}")]
    DegenerateSegment { start: Point2, end: Point2 },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("separation must be positive and finite, got {0}")]
    InvalidSeparation(f64),
    #[error("a closed curve needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} coincides with its successor")]
    ConsecutiveDuplicate(usize),
    #[error("empty point set")]
    EmptyInput,
    #[error("segments {first} and {second} overlap")]
    OverlapPresent { first: usize, second: usize },
    #[error("segments {first} and {second} overlap with opposite orientations")]
    OppositeOverlap { first: usize, second: usize },
    #[error("segments {first} and {second} overlap only partially after refinement")]
    OverlapUnresolved { first: usize, second: usize },
    #[error("separation {separation} makes detours touch other parts of the curve")]
    SeparationTooLarge { separation: f64 },
}
