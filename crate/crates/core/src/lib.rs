pub mod geometry;

use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type Mobius = geometry::MobiusMap<f64>;
pub type Point = geometry::CPoint<f64>;
pub type H2 = geometry::H2Point<f64>;
pub type H3 = geometry::H3Point<f64>;
pub mod farey;
pub mod grafting;
pub mod holonomy;
pub mod lamination;
pub mod pleated;
pub mod topology;
pub mod schottky;
pub mod serde_ext;
