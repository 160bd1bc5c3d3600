//! Planar maps near the identity: orbit curves, C1 estimates, runtime checks
//! of the local properties used by the localization argument, a
//! degree-certified fixed point finder, capital points, the common fixed
//! point harness for finite commuting families, and the counterexample
//! showing that a single fixed point need not lie in the hull of an orbit.

mod bump;
mod capital;
mod counterexample;
mod degree;
mod estimates;
mod linalg;
mod map;
mod orbit;
mod theorem;

use thiserror::Error;

use crate::geom::{GeomError, Point2};
use crate::untangle::UntangleError;

pub use bump::{bump, smooth_step, BUMP_MAX_SLOPE};
pub use capital::{find_capital_point, CapitalConfig, CapitalPointCertificate};
pub use counterexample::{counterexample_family, CounterexampleReport};
pub use degree::{displacement_degree, fixed_point_in_curve, fixed_point_in_disk, FixedPointCertificate};
pub use estimates::{
    check_b1, check_b2, check_segment_estimate, estimate_c1_distance, B1Report, B2Report, C1Estimate,
    SegmentEstimateReport,
};
pub use linalg::Mat2;
pub use map::{DiffeoMap, MapDescriptor, MapSpec, PlanarMap, FD_STEP};
pub use orbit::{orbit, orbit_curve, return_times, OrbitCurve};
pub use theorem::{
    check_commutation, locate_common_fixed_point, sample_orbit, verify_orbit_localization, LocalizationEntry,
    LocalizationReport, MapResidual, StepCase, StepRecord, TheoremCertificate, TheoremConfig,
};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DynamicsError {
    #[error("iterate {step} is not finite")]
    NonFiniteIterate { step: usize },
    #[error("seed is fixed (displacement {displacement})")]
    FixedSeed { displacement: f64 },
    #[error("orbit does not return near its seed")]
    NoReturns,
    #[error("orbit curve is degenerate: {0}")]
    DegenerateOrbitCurve(String),
    #[error("candidate point is not fixed by {label} (residual {residual})")]
    CommonFixCheckFailed { label: String, residual: f64 },
    #[error("displacement field has degree 0 along the loop")]
    ZeroDegree,
    #[error("displacement nearly vanishes on the loop at {at}")]
    BoundaryFixedPoint { at: Point2 },
    #[error("displacement winding is {residual} turns from an integer")]
    AmbiguousDegree { residual: f64 },
    #[error("{first} and {second} do not commute (residual {residual})")]
    CommutationViolation {
        first: String,
        second: String,
        residual: f64,
    },
    #[error("orbit leaves the working domain at {at}")]
    UnboundedOrbit { at: Point2 },
    #[error("localization failed at step {step}: {}", .trace.join("; "))]
    LocalizationFailure { step: usize, trace: Vec<String> },
    #[error("geometry constraint violated: {0}")]
    GeometryConstraintViolated(String),
    #[error("seed is not fixed by {label} (residual {residual})")]
    SeedNotFixed { label: String, residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite value at {at}")]
    NonFiniteValue { at: Point2 },
    #[error(transparent)]
    Untangle(#[from] UntangleError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}
