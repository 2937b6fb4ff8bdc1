//! Möbius maps and hyperbolic geometry in the upper half-plane and
//! upper half-space models.

mod hyperbolic;
mod mobius;
mod point;
mod scalar;

pub use hyperbolic::{angle_between_geodesics, dist_h2, dist_h3, geodesic_crossing, GeodesicH2, GeodesicH3, Side};
pub use mobius::{Classification, FixedPoints, MobiusKind, MobiusMap, Selector, CLASSIFY_MARGIN};
pub use point::{CPoint, H2Point, H3Point};
pub use scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("degenerate input")]
    Degenerate,
    #[error("no isolated fixed points")]
    NoIsolatedFixedPoints,
    #[error("no axis")]
    NoAxis,
    #[error("disjoint")]
    Disjoint,
    #[error("asymptotic")]
    Asymptotic,
    #[error("outside model: {0}")]
    OffModel(&'static str),
}
