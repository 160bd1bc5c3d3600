//! Decomposition of a closed polygonal curve into simple closed loops.
//!
//! The pipeline separates multiply covered segments, splits segments at
//! crossing points, reconnects strands at every multiple point so that no
//! transversal crossing remains, and traces the resulting loops. Loops are
//! then checked for coverage, segment containment, disk nesting and index
//! additivity, and a loop whose disk carries a nonzero index is selected.

mod decompose;
mod nesting;
mod star;
mod verify;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{AngleViolation, ClosedPolyCurve, GeomError, Point2};

pub use decompose::{decompose, DecomposeConfig, DecompositionReport, DecompositionStats};
pub use nesting::{disk_relation, interior_point, nesting_relation, nested_disk_chains, sample_interior, select_kappa, DiskRelation, NestingRelation};
pub use star::{build_vertex_star, persistent_crossings, resolve_vertex, SeparatingLine, StarSegment, VertexStar};
pub use verify::{
    check_kappa, verify_decomposition, AdditivitySample, CheckFailure, MultiplicitySample, PropertyCheck,
    VerificationReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Ccw,
    Cw,
}

impl Orientation {
    pub fn sign(self) -> i64 {
        match self {
            Orientation::Ccw => 1,
            Orientation::Cw => -1,
        }
    }
}

/// A simple closed loop produced by the decomposition.
///
/// `parent_segment_map[i]` is the index of the segment of the original
/// curve that contains segment `i` of this loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimpleLoop {
    pub curve: ClosedPolyCurve,
    pub orientation: Orientation,
    pub parent_segment_map: Vec<usize>,
}

impl SimpleLoop {
    pub fn new(curve: ClosedPolyCurve, parent_segment_map: Vec<usize>) -> Self {
        let orientation = if curve.signed_area() >= 0.0 {
            Orientation::Ccw
        } else {
            Orientation::Cw
        };
        SimpleLoop {
            curve,
            orientation,
            parent_segment_map,
        }
    }

    pub fn vertices(&self) -> &[Point2] {
        self.curve.vertices()
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum UntangleError {
    #[error("angle hypothesis violated by {} segment pair(s)", .0.len())]
    AngleHypothesisViolated(Vec<AngleViolation>),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("no line through {vertex} separates incoming from outgoing segments")]
    ConeSeparationFailure { vertex: Point2 },
    #[error("star at {vertex} has {incoming} incoming and {outgoing} outgoing segments")]
    RankMismatch {
        vertex: Point2,
        incoming: usize,
        outgoing: usize,
    },
    #[error("{0} is not a vertex of the curve")]
    NotAVertex(Point2),
    #[error("vertex resolution exceeded the budget of {budget} steps")]
    NonTermination { budget: usize },
    #[error("disks of loops {first} and {second} neither nest nor are disjoint")]
    NestingViolated { first: usize, second: usize },
    #[error("no loop has a disk on which the index of the curve is nonzero")]
    NoPositiveLoop,
    #[error("property ({property}) failed: {detail}")]
    VerificationFailed { property: String, detail: String },
}
