use std::ops::Mul;

use num_complex::Complex;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use super::{CPoint, GeodesicH3, GeometryError, H3Point, Scalar};

pub const CLASSIFY_MARGIN: f64 = 1e-9;

/// Element of PSL(2,C), stored as a det-1 matrix with a canonical sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusMap<T: Scalar> {
    a: Complex<T>,
    b: Complex<T>,
    c: Complex<T>,
    d: Complex<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MobiusKind {
    Identity,
    Parabolic,
    Elliptic,
    Loxodromic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification<T: Scalar> {
    pub kind: MobiusKind,
    pub tr_sq: Complex<T>,
    pub margin: T,
    /// Set when tr² sits within a thousand margins of a decision boundary.
    pub borderline: bool,
}

/// Fixed point data. Loxodromic maps list the attracting point first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FixedPoints<T: Scalar> {
    One(CPoint<T>),
    Two(CPoint<T>, CPoint<T>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    Attracting,
    Repelling,
}

impl Selector {
    pub fn flip(self) -> Self {
        match self {
            Selector::Attracting => Selector::Repelling,
            Selector::Repelling => Selector::Attracting,
        }
    }
}

fn c<T: Scalar>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

fn cr<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

impl<T: Scalar> MobiusMap<T> {
    pub fn new(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Result<Self, GeometryError> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !det.norm().is_finite() || !(det.norm() > T::epsilon() * scale * scale) {
            return Err(GeometryError::Degenerate);
        }
        let s = det.sqrt();
        Ok(Self::signed(a / s, b / s, c / s, d / s))
    }

    pub fn from_real(a: T, b: T, c: T, d: T) -> Result<Self, GeometryError> {
        Self::new(cr(a), cr(b), cr(c), cr(d))
    }

    fn signed(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Self {
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        let tiny = T::epsilon() * T::lit(8.0) * scale;
        let lead = [a, b, c, d].into_iter().find(|x| x.norm() > tiny).unwrap_or(a);
        let flip = lead.re < T::zero() || (lead.re == T::zero() && lead.im < T::zero());
        if flip {
            MobiusMap { a: -a, b: -b, c: -c, d: -d }
        } else {
            MobiusMap { a, b, c, d }
        }
    }

    pub fn identity() -> Self {
        MobiusMap { a: cr(T::one()), b: cr(T::zero()), c: cr(T::zero()), d: cr(T::one()) }
    }

    /// z ↦ λ² z, i.e. diag(λ, 1/λ).
    pub fn diag(lambda: Complex<T>) -> Self {
        Self::signed(lambda, cr(T::zero()), cr(T::zero()), lambda.inv())
    }

    /// Translation along the imaginary axis by complex length `l` (z ↦ e^l z).
    pub fn dilation(l: Complex<T>) -> Self {
        Self::diag((l * cr(T::lit(0.5))).exp())
    }

    pub fn translation(t: Complex<T>) -> Self {
        Self::signed(cr(T::one()), t, cr(T::zero()), cr(T::one()))
    }

    /// The SO(2) matrix [[cos θ, −sin θ], [sin θ, cos θ]].
    pub fn so2(theta: T) -> Self {
        let (s, co) = theta.sin_cos();
        Self::signed(cr(co), cr(-s), cr(s), cr(co))
    }

    pub fn entries(&self) -> [Complex<T>; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn a(&self) -> Complex<T> {
        self.a
    }
    pub fn b(&self) -> Complex<T> {
        self.b
    }
    pub fn c(&self) -> Complex<T> {
        self.c
    }
    pub fn d(&self) -> Complex<T> {
        self.d
    }

    pub fn det(&self) -> Complex<T> {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex<T> {
        self.a + self.d
    }

    pub fn trace_sq(&self) -> Complex<T> {
        let t = self.trace();
        t * t
    }

    pub fn inverse(&self) -> Self {
        Self::signed(self.d, -self.b, -self.c, self.a)
    }

    /// Product without the canonical-sign pass. Still det 1 up to rounding.
    pub fn compose(&self, o: &Self) -> Self {
        Self::signed(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    /// Re-impose det 1 after long products.
    pub fn renormalized(&self) -> Self {
        let s = self.det().sqrt();
        Self::signed(self.a / s, self.b / s, self.c / s, self.d / s)
    }

    pub fn conjugate_by(&self, g: &Self) -> Self {
        g.compose(self).compose(&g.inverse())
    }

    pub fn is_real(&self, tol: T) -> bool {
        self.entries().iter().all(|x| x.im.abs() <= tol)
    }

    /// Max-entry distance modulo sign.
    pub fn distance(&self, o: &Self) -> T {
        let plus = (0..4).map(|i| (self.entries()[i] - o.entries()[i]).norm()).fold(T::zero(), T::max);
        let minus = (0..4).map(|i| (self.entries()[i] + o.entries()[i]).norm()).fold(T::zero(), T::max);
        plus.min(minus)
    }

    pub fn apply(&self, p: &CPoint<T>) -> CPoint<T> {
        match p {
            CPoint::Infinity => {
                if self.c.norm() == T::zero() {
                    CPoint::Infinity
                } else {
                    CPoint::Finite(self.a / self.c)
                }
            }
            CPoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() == T::zero() {
                    CPoint::Infinity
                } else {
                    CPoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Poincaré extension acting on the upper half-space.
    pub fn apply_h3(&self, p: &H3Point<T>) -> H3Point<T> {
        let z = p.z();
        let t2 = p.t * p.t;
        let cz_d = self.c * z + self.d;
        let den = cz_d.norm_sqr() + self.c.norm_sqr() * t2;
        let num = (self.a * z + self.b) * cz_d.conj() + self.a * self.c.conj() * cr(t2);
        let w = num / cr(den);
        H3Point { x: w.re, y: w.im, t: p.t / den }
    }

    pub fn classify(&self) -> Classification<T> {
        self.classify_with(T::lit(CLASSIFY_MARGIN))
    }

    pub fn classify_with(&self, margin: T) -> Classification<T> {
        let tr_sq = self.trace_sq();
        let four = T::lit(4.0);
        let band = margin * T::lit(1e3);
        let to_identity = self.distance(&Self::identity());
        let to_four = (tr_sq - cr(four)).norm();
        // distance from tr² to the closed segment [0, 4]
        let clamped = tr_sq.re.max(T::zero()).min(four);
        let to_segment = (tr_sq - cr(clamped)).norm();
        let (kind, borderline) = if to_identity <= margin {
            (MobiusKind::Identity, false)
        } else if to_four <= margin {
            (MobiusKind::Parabolic, to_identity <= band)
        } else if to_segment <= margin && tr_sq.re < four - margin {
            (MobiusKind::Elliptic, to_four <= band || tr_sq.re.abs() <= band)
        } else {
            (MobiusKind::Loxodromic, to_segment <= band || to_four <= band)
        };
        Classification { kind, tr_sq, margin, borderline }
    }

    fn c_is_zero(&self) -> bool {
        let scale = self.a.norm().max(self.b.norm()).max(self.d.norm()).max(T::one());
        self.c.norm() <= T::epsilon() * T::lit(4.0) * scale
    }

    pub fn fixed_points(&self) -> Result<FixedPoints<T>, GeometryError> {
        let cls = self.classify();
        if cls.kind == MobiusKind::Identity {
            return Err(GeometryError::NoIsolatedFixedPoints);
        }
        let two = cr(T::lit(2.0));
        if cls.kind == MobiusKind::Parabolic {
            if self.c_is_zero() {
                return Ok(FixedPoints::One(CPoint::Infinity));
            }
            return Ok(FixedPoints::One(CPoint::Finite((self.a - self.d) / (two * self.c))));
        }
        let (p, q) = if self.c_is_zero() {
            // ∞ and b/(d − a)
            let other = CPoint::Finite(self.b / (self.d - self.a));
            (CPoint::Infinity, other)
        } else {
            let disc = (self.trace_sq() - cr(T::lit(4.0))).sqrt();
            let am = self.a - self.d;
            // pick the numerically stable root first, get the other from the product
            let s1 = if (am + disc).norm() >= (am - disc).norm() { am + disc } else { am - disc };
            let z1 = s1 / (two * self.c);
            // z1 z2 = −b / c
            let z2 = if z1.norm() > T::zero() { -self.b / (self.c * z1) } else { (am - (s1 - am)) / (two * self.c) };
            (CPoint::Finite(z1), CPoint::Finite(z2))
        };
        if cls.kind == MobiusKind::Loxodromic && !self.is_attracting(&p) {
            return Ok(FixedPoints::Two(q, p));
        }
        Ok(FixedPoints::Two(p, q))
    }

    /// |derivative| < 1 at a fixed point.
    fn is_attracting(&self, p: &CPoint<T>) -> bool {
        match p {
            CPoint::Infinity => self.a.norm() > self.d.norm(),
            CPoint::Finite(z) => (self.c * z + self.d).norm() > T::one(),
        }
    }

    pub fn fixed_point(&self, sel: Selector) -> Result<CPoint<T>, GeometryError> {
        match self.fixed_points()? {
            FixedPoints::Two(att, rep) if self.classify().kind == MobiusKind::Loxodromic => Ok(match sel {
                Selector::Attracting => att,
                Selector::Repelling => rep,
            }),
            _ => Err(GeometryError::NoAxis),
        }
    }

    /// Complex translation length ℒ with 2cosh(ℒ/2) = ±tr, Re ℒ > 0, Im ℒ ∈ (−π, π].
    pub fn complex_length(&self) -> Result<Complex<T>, GeometryError> {
        if self.classify().kind != MobiusKind::Loxodromic {
            return Err(GeometryError::NoAxis);
        }
        let tr = self.trace();
        let disc = (tr * tr - cr(T::lit(4.0))).sqrt();
        let half = cr(T::lit(0.5));
        let l1 = (tr + disc) * half;
        let l2 = (tr - disc) * half;
        let lam = if l1.norm() >= l2.norm() { l1 } else { l2 };
        let re = T::lit(2.0) * lam.norm().ln();
        let mut im = T::lit(2.0) * lam.arg();
        let pi = T::PI();
        let two_pi = pi + pi;
        while im > pi {
            im = im - two_pi;
        }
        while im <= -pi {
            im = im + two_pi;
        }
        Ok(c(re, im))
    }

    pub fn translation_length(&self) -> Result<T, GeometryError> {
        Ok(self.complex_length()?.re)
    }

    /// Axis oriented from the repelling to the attracting fixed point.
    pub fn axis_and_length(&self) -> Result<(GeodesicH3<T>, Complex<T>), GeometryError> {
        let l = self.complex_length()?;
        match self.fixed_points()? {
            FixedPoints::Two(att, rep) => Ok((GeodesicH3::new(rep, att)?, l)),
            FixedPoints::One(_) => Err(GeometryError::NoAxis),
        }
    }

    /// Map sending 0 to `zero` and ∞ to `inf`. Real inputs give a map in PSL(2,R).
    pub fn normalizer(zero: &CPoint<T>, inf: &CPoint<T>) -> Result<Self, GeometryError> {
        let one = cr(T::one());
        let o = cr(T::zero());
        // columns scaled to unit size; only precomposes with a positive dilation
        let unit = |z: &Complex<T>| T::one() / z.norm().max(T::one());
        let m = match (zero, inf) {
            (CPoint::Finite(r), CPoint::Finite(a)) => {
                let (sa, sr) = (cr(unit(a)), cr(unit(r)));
                [*a * sa, *r * sr, sa, sr]
            }
            (CPoint::Finite(r), CPoint::Infinity) => [one, *r, o, one],
            (CPoint::Infinity, CPoint::Finite(a)) => [*a, -one, one, o],
            (CPoint::Infinity, CPoint::Infinity) => return Err(GeometryError::Degenerate),
        };
        let det = m[0] * m[3] - m[1] * m[2];
        if det.norm() <= T::epsilon() {
            return Err(GeometryError::Degenerate);
        }
        // keep orientation on the real line: precompose with z ↦ −z when det < 0
        let m = if det.re < T::zero() { [m[0], -m[1], m[2], -m[3]] } else { m };
        Self::new(m[0], m[1], m[2], m[3])
    }

    pub fn cast<U: Scalar>(&self) -> MobiusMap<U> {
        let f = |z: Complex<T>| Complex::new(U::lit(z.re.f64()), U::lit(z.im.f64()));
        MobiusMap { a: f(self.a), b: f(self.b), c: f(self.c), d: f(self.d) }
    }
}

impl<T: Scalar> Mul for MobiusMap<T> {
    type Output = MobiusMap<T>;
    fn mul(self, o: Self) -> Self {
        self.compose(&o)
    }
}

impl<T: Scalar> Mul for &MobiusMap<T> {
    type Output = MobiusMap<T>;
    fn mul(self, o: Self) -> MobiusMap<T> {
        self.compose(o)
    }
}

impl<T: Scalar> Serialize for MobiusMap<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<f64> = self.entries().iter().flat_map(|z| [z.re.f64(), z.im.f64()]).collect();
        v.serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for MobiusMap<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = <[f64; 8]>::deserialize(d)?;
        let z = |i: usize| Complex::new(T::lit(v[2 * i]), T::lit(v[2 * i + 1]));
        let (a, b, c, d) = (z(0), z(1), z(2), z(3));
        // entries already in SL(2) up to rounding are kept bit for bit, so
        // anything this crate wrote reads back as the same map
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        let drift = (a * d - b * c - cr(T::one())).norm();
        if scale.is_finite() && drift <= T::lit(1e-10) * (T::one() + scale * scale) {
            return Ok(Self::signed(a, b, c, d));
        }
        MobiusMap::new(a, b, c, d).map_err(de::Error::custom)
    }
}
