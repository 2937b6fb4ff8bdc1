use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{CPoint, GeometryError, H2Point, H3Point, MobiusMap, Scalar};

/// Oriented geodesic in H² given by its endpoints on the extended real line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GeodesicH2<T: Scalar> {
    pub start: CPoint<T>,
    pub end: CPoint<T>,
}

/// Oriented geodesic in H³ given by its endpoints on the sphere at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GeodesicH3<T: Scalar> {
    pub start: CPoint<T>,
    pub end: CPoint<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

fn distinct<T: Scalar>(p: &CPoint<T>, q: &CPoint<T>) -> bool {
    p.chordal(q) > T::epsilon() * T::lit(16.0)
}

impl<T: Scalar> GeodesicH2<T> {
    pub fn new(start: CPoint<T>, end: CPoint<T>) -> Result<Self, GeometryError> {
        let tol = T::epsilon() * T::lit(64.0);
        if start.as_real(tol).is_none() || end.as_real(tol).is_none() {
            return Err(GeometryError::OffModel("H² endpoints must be extended reals"));
        }
        if !distinct(&start, &end) {
            return Err(GeometryError::Degenerate);
        }
        Ok(GeodesicH2 { start, end })
    }

    pub fn from_reals(start: Option<T>, end: Option<T>) -> Result<Self, GeometryError> {
        let p = |x: Option<T>| x.map(CPoint::real).unwrap_or(CPoint::Infinity);
        Self::new(p(start), p(end))
    }

    /// Orientation-preserving real map taking this geodesic to (0, ∞).
    pub fn straightener(&self) -> Result<MobiusMap<T>, GeometryError> {
        Ok(MobiusMap::normalizer(&self.start, &self.end)?.inverse())
    }

    /// Which side of the oriented geodesic a boundary point lies on.
    /// Left of the upward imaginary axis is the negative reals.
    pub fn side_of(&self, p: &CPoint<T>) -> Result<Side, GeometryError> {
        let n = self.straightener()?;
        match n.apply(p) {
            CPoint::Infinity => Err(GeometryError::Asymptotic),
            CPoint::Finite(z) if z.re.abs() <= T::epsilon() * T::lit(64.0) => Err(GeometryError::Asymptotic),
            CPoint::Finite(z) => Ok(if z.re < T::zero() { Side::Left } else { Side::Right }),
        }
    }

    pub fn reversed(&self) -> Self {
        GeodesicH2 { start: self.end, end: self.start }
    }
}

impl<T: Scalar> GeodesicH3<T> {
    pub fn new(start: CPoint<T>, end: CPoint<T>) -> Result<Self, GeometryError> {
        if !distinct(&start, &end) {
            return Err(GeometryError::Degenerate);
        }
        Ok(GeodesicH3 { start, end })
    }
}

/// Unoriented intersection angle in [0, π/2] of two linked geodesics.
pub fn angle_between_geodesics<T: Scalar>(g1: &GeodesicH2<T>, g2: &GeodesicH2<T>) -> Result<T, GeometryError> {
    let n = g1.straightener()?;
    let tol = T::epsilon() * T::lit(1e3);
    let u = n.apply(&g2.start);
    let v = n.apply(&g2.end);
    let (u, v) = match (u.as_real(tol), v.as_real(tol)) {
        (Some(Some(u)), Some(Some(v))) => (u, v),
        _ => return Err(GeometryError::Asymptotic),
    };
    let scale = T::one() + u.abs().max(v.abs());
    if u.abs() <= tol * scale || v.abs() <= tol * scale {
        return Err(GeometryError::Asymptotic);
    }
    if u * v > T::zero() {
        return Err(GeometryError::Disjoint);
    }
    let cos = ((u + v) / (v - u)).abs().min(T::one());
    Ok(cos.acos())
}

/// Crossing point of two linked geodesics in H².
pub fn geodesic_crossing<T: Scalar>(g1: &GeodesicH2<T>, g2: &GeodesicH2<T>) -> Result<H2Point<T>, GeometryError> {
    angle_between_geodesics(g1, g2)?;
    let n = g1.straightener()?;
    let u = n.apply(&g2.start).finite().unwrap().re;
    let v = n.apply(&g2.end).finite().unwrap().re;
    let h = (-u * v).sqrt();
    let p = n.inverse().apply(&CPoint::new(T::zero(), h));
    H2Point::from_complex(p.finite().ok_or(GeometryError::Degenerate)?)
}

pub fn dist_h2<T: Scalar>(p: &H2Point<T>, q: &H2Point<T>) -> T {
    let num = (p.z() - q.z()).norm();
    T::lit(2.0) * (num / (T::lit(2.0) * (p.y * q.y).sqrt())).asinh()
}

pub fn dist_h3<T: Scalar>(p: &H3Point<T>, q: &H3Point<T>) -> T {
    let dz: Complex<T> = p.z() - q.z();
    let dt = p.t - q.t;
    let num = (dz.norm_sqr() + dt * dt).sqrt();
    T::lit(2.0) * (num / (T::lit(2.0) * (p.t * q.t).sqrt())).asinh()
}
