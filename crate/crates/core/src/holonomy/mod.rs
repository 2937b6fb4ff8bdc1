//! Fuchsian holonomy: Fenchel–Nielsen construction, word evaluation,
//! loxodromic certification, intersection numbers and angles.

mod earthquake;
mod fn_coords;
mod intersection;
mod rep;
mod scan;

pub use intersection::{crossings_at_ball, intersection_count, is_parallel, is_simple, self_intersections, stable_intersection, Crossing, CrossingReport, DEFAULT_BALL};
pub use earthquake::{crossing_lifts, geometric_dehn_twist, LiftCrossing};
pub use fn_coords::{build_bent, build_from_fn, reference_curves, FnCoordinates, STANDARD_G2};
pub use rep::{FnOrigin, HolonomyRep, RELATOR_TOL};
pub use scan::{commutator_trace, commutator_trace_stable, purely_loxodromic_scan, EndpointViolation, LoxodromicityReport, WordViolation, ENDPOINT_GAP};

use crate::geometry::GeometryError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HolonomyError {
    #[error("relator residual {0:e} exceeds tolerance")]
    Relator(f64),
    #[error("bad shape: {0}")]
    Shape(String),
    #[error("numerically degenerate hexagon for lengths {0:?}")]
    DegenerateHexagon(Vec<f64>),
    #[error("{0} is not loxodromic")]
    NotLoxodromic(String),
    #[error("representation is not Fuchsian")]
    NotFuchsian,
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("cap exhausted: {0}")]
    CapExhausted(String),
}
