use num_complex::Complex;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

use super::{GeometryError, Scalar};

/// A point of the Riemann sphere. Infinity is its own variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CPoint<T> {
    Finite(Complex<T>),
    Infinity,
}

impl<T: Scalar> CPoint<T> {
    pub fn real(x: T) -> Self {
        CPoint::Finite(Complex::new(x, T::zero()))
    }

    pub fn new(re: T, im: T) -> Self {
        CPoint::Finite(Complex::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, CPoint::Infinity)
    }

    pub fn finite(&self) -> Option<Complex<T>> {
        match self {
            CPoint::Finite(z) => Some(*z),
            CPoint::Infinity => None,
        }
    }

    /// Chordal distance on the unit sphere (diameter 2).
    pub fn chordal(&self, other: &Self) -> T {
        let two = T::lit(2.0);
        match (self, other) {
            (CPoint::Infinity, CPoint::Infinity) => T::zero(),
            (CPoint::Finite(z), CPoint::Infinity) | (CPoint::Infinity, CPoint::Finite(z)) => {
                two / (T::one() + z.norm_sqr()).sqrt()
            }
            (CPoint::Finite(z), CPoint::Finite(w)) => {
                two * (z - w).norm() / ((T::one() + z.norm_sqr()) * (T::one() + w.norm_sqr())).sqrt()
            }
        }
    }

    /// Real value when the point lies on the extended real line.
    pub fn as_real(&self, tol: T) -> Option<Option<T>> {
        match self {
            CPoint::Infinity => Some(None),
            CPoint::Finite(z) if z.im.abs() <= tol * (T::one() + z.re.abs()) => Some(Some(z.re)),
            _ => None,
        }
    }

    pub fn cast<U: Scalar>(&self) -> CPoint<U> {
        match self {
            CPoint::Infinity => CPoint::Infinity,
            CPoint::Finite(z) => CPoint::Finite(Complex::new(U::lit(z.re.f64()), U::lit(z.im.f64()))),
        }
    }
}

impl<T: Scalar> Serialize for CPoint<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            CPoint::Infinity => s.serialize_str("inf"),
            CPoint::Finite(z) => {
                let mut t = s.serialize_tuple(2)?;
                t.serialize_element(&z.re.f64())?;
                t.serialize_element(&z.im.f64())?;
                t.end()
            }
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for CPoint<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Tag(String),
            Pair([f64; 2]),
        }
        match Repr::deserialize(d)? {
            Repr::Tag(s) if s == "inf" => Ok(CPoint::Infinity),
            Repr::Tag(s) => Err(de::Error::custom(format!("bad point tag {s:?}"))),
            Repr::Pair([re, im]) => Ok(CPoint::new(T::lit(re), T::lit(im))),
        }
    }
}

/// Upper half-plane point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct H2Point<T: Scalar> {
    #[serde(with = "scalar_serde")]
    pub x: T,
    #[serde(with = "scalar_serde")]
    pub y: T,
}

impl<T: Scalar> H2Point<T> {
    pub fn new(x: T, y: T) -> Result<Self, GeometryError> {
        if !(y > T::zero()) {
            return Err(GeometryError::OffModel("height must be positive"));
        }
        Ok(H2Point { x, y })
    }

    pub fn from_complex(z: Complex<T>) -> Result<Self, GeometryError> {
        Self::new(z.re, z.im)
    }

    pub fn z(&self) -> Complex<T> {
        Complex::new(self.x, self.y)
    }

    /// The same point on the vertical plane over the real axis in H³.
    pub fn lift(&self) -> H3Point<T> {
        H3Point { x: self.x, y: T::zero(), t: self.y }
    }
}

/// Upper half-space point: boundary coordinate x + iy, height t.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct H3Point<T: Scalar> {
    #[serde(with = "scalar_serde")]
    pub x: T,
    #[serde(with = "scalar_serde")]
    pub y: T,
    #[serde(with = "scalar_serde")]
    pub t: T,
}

impl<T: Scalar> H3Point<T> {
    pub fn new(x: T, y: T, t: T) -> Result<Self, GeometryError> {
        if !(t > T::zero()) {
            return Err(GeometryError::OffModel("height must be positive"));
        }
        Ok(H3Point { x, y, t })
    }

    pub fn z(&self) -> Complex<T> {
        Complex::new(self.x, self.y)
    }
}

pub(crate) mod scalar_serde {
    use super::Scalar;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(v.f64())
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        Ok(T::lit(f64::deserialize(d)?))
    }
}
