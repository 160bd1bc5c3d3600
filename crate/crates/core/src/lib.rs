//! Untangling closed polygonal curves into simple loops, and locating
//! common fixed points of commuting planar maps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod dynamics;
pub mod geom;
pub mod untangle;
pub mod winding;

pub use dynamics::{
    counterexample_family, find_capital_point, fixed_point_in_disk, locate_common_fixed_point, DiffeoMap,
    DynamicsError, Mat2, MapSpec, TheoremCertificate, TheoremConfig,
};
pub use geom::{
    build_closed_curve, ClosedPolyCurve, ConvexPolygon, GeomError, OrientedSegment, Point2,
};
pub use untangle::{decompose, DecomposeConfig, DecompositionReport, SimpleLoop};
pub use winding::{winding_number, winding_number_oracle, IndexValue};
