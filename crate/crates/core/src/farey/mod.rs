//! Farey tessellation combinatorics for the two kinds of elementary move:
//! slopes, diagonal exchanges, twists as exchange paths and the
//! bi-infinite interpolating sequence.

mod path;
mod slope;
mod triangulation;

pub use path::{companion_multiloop, interpolation_path, CompanionMultiloop, LaminationSeqSpec, PantsArcs, SPIRAL};
pub use slope::Slope;
pub use triangulation::{
    basis_words, fan_step, slope_word, twist_as_exchanges, twist_slope, Exchange, FareyCase, FareyTriangle, IdealTriangulationS4,
    IdealTriangulationT1,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FareyError {
    #[error("cannot parse slope {0:?}")]
    Parse(String),
    #[error("not a Farey triangle: {0}")]
    NotFarey(String),
    #[error("edge not in triangulation: {0}")]
    NotAnEdge(String),
    #[error("left twists only")]
    LeftTwistsOnly,
    #[error("ends equal")]
    EqualEnds,
    #[error("empty range {0}..={1}")]
    Range(i64, i64),
}
