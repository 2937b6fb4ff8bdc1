//! Words, curves, pants decompositions, Dehn twists and train tracks.

mod catalog;
mod curve;
mod pants;
mod traintrack;
mod twist;
mod word;

pub use catalog::{CatalogEntry, CurveCatalog};
pub use curve::{CurveClass, SurfacePresentation};
pub use pants::{
    apply_move, enumerate_elementary_moves, pants_graph_path, same_decomposition, validate_pants_decomposition, DualGraph, ElementaryMove, MoveCase,
    PantsCertificate, PantsDecomposition, PathCap, Violation,
};
pub use traintrack::{standard_weights_by_counting, Branch, Carrying, CarryingCertificate, NearlyStraight, TrainTrack};
pub use twist::{algebraic_intersection, apply_automorphisms, dehn_twist, waist_word, TwistCurve};
pub use word::{w, Letter, Word};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("genus {0} unsupported")]
    Genus(usize),
    #[error("empty curve")]
    EmptyCurve,
    #[error("twist basis")]
    TwistBasis,
    #[error("curve not in decomposition: {0}")]
    NotMember(String),
    #[error("cap exhausted: {0}")]
    CapExhausted(String),
    #[error("{0}")]
    Oracle(String),
}
