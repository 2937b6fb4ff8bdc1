use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::FareyError;

/// A slope p/q in ℚ ∪ {∞}, stored reduced with q ≥ 0 and ∞ = 1/0. As a
/// homology class in a handle it is q·a + p·b, so 0 is a and ∞ is b.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Slope {
    p: i64,
    q: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

impl Slope {
    pub const ZERO: Slope = Slope { p: 0, q: 1 };
    pub const INF: Slope = Slope { p: 1, q: 0 };

    pub fn new(p: i64, q: i64) -> Result<Slope, FareyError> {
        if p == 0 && q == 0 {
            return Err(FareyError::Parse("0/0".into()));
        }
        let g = gcd(p, q);
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 || (q == 0 && p < 0) {
            p = -p;
            q = -q;
        }
        Ok(Slope { p, q })
    }

    pub fn int(n: i64) -> Slope {
        Slope { p: n, q: 1 }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn vector(&self) -> (i64, i64) {
        (self.p, self.q)
    }

    pub fn from_vector(v: (i64, i64)) -> Result<Slope, FareyError> {
        Slope::new(v.0, v.1)
    }

    pub fn is_infinite(&self) -> bool {
        self.q == 0
    }

    /// Signed algebraic intersection ω(self, other) of the handle classes.
    pub fn omega(&self, o: &Slope) -> i64 {
        omega(self.vector(), o.vector())
    }

    pub fn adjacent(&self, o: &Slope) -> bool {
        self.omega(o).abs() == 1
    }

    pub fn value(&self) -> f64 {
        if self.q == 0 { f64::INFINITY } else { self.p as f64 / self.q as f64 }
    }
}

/// Numeric order on ℚ with ∞ last.
impl Ord for Slope {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        match (self.q == 0, o.q == 0) {
            (true, true) => std::cmp::Ordering::Equal,
            (true, false) => std::cmp::Ordering::Greater,
            (false, true) => std::cmp::Ordering::Less,
            _ => ((self.p as i128) * (o.q as i128)).cmp(&((o.p as i128) * (self.q as i128))),
        }
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

pub(crate) fn omega(u: (i64, i64), v: (i64, i64)) -> i64 {
    u.1 * v.0 - u.0 * v.1
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.q {
            0 => write!(f, "inf"),
            1 => write!(f, "{}", self.p),
            q => write!(f, "{}/{}", self.p, q),
        }
    }
}

impl FromStr for Slope {
    type Err = FareyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "inf" || s == "∞" {
            return Ok(Slope::INF);
        }
        let bad = || FareyError::Parse(s.to_string());
        match s.split_once('/') {
            Some((p, q)) => Slope::new(p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?),
            None => Ok(Slope::int(s.parse().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
