//! Measured laminations supported on multiloops, with heavy leaves and
//! twist-limit descriptors, and the angle between two such laminations.

use std::f64::consts::PI;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::holonomy::{geometric_dehn_twist, intersection_count, HolonomyError, HolonomyRep, DEFAULT_BALL};
use crate::topology::{dehn_twist, CurveClass, TopologyError};

/// Transverse weight of a closed leaf. Multiples of 2π are kept as the
/// integer; heavy leaves are a flag, never a float infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    Real(f64),
    TwoPi(u64),
    Heavy,
}

impl Weight {
    pub fn is_heavy(&self) -> bool {
        matches!(self, Weight::Heavy)
    }

    /// Finite value, None when heavy.
    pub fn value(&self) -> Option<f64> {
        match self {
            Weight::Real(x) => Some(*x),
            Weight::TwoPi(k) => Some(2.0 * PI * *k as f64),
            Weight::Heavy => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Weight::Real(x) => *x > 0.0,
            Weight::TwoPi(k) => *k > 0,
            Weight::Heavy => true,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WeightRepr {
    Real(f64),
    TwoPi { two_pi: u64 },
    Text(String),
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Weight::Real(x) => WeightRepr::Real(*x),
            Weight::TwoPi(k) => WeightRepr::TwoPi { two_pi: *k },
            Weight::Heavy => WeightRepr::Text("inf".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match WeightRepr::deserialize(d)? {
            WeightRepr::Real(x) if x.is_finite() => Ok(Weight::Real(x)),
            WeightRepr::TwoPi { two_pi } => Ok(Weight::TwoPi(two_pi)),
            WeightRepr::Text(t) if t == "inf" => Ok(Weight::Heavy),
            _ => Err(serde::de::Error::custom("weight must be a finite number, {\"two_pi\": k} or \"inf\"")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub curve: CurveClass,
    pub weight: Weight,
}

/// ν = lim Twⁿ(N) with the twist taken along every curve of `along`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistLimit {
    pub base: Vec<(CurveClass, u64)>,
    pub along: Vec<CurveClass>,
}

impl TwistLimit {
    /// The finite iterate Twⁿ(N). Twists along the standard generators are
    /// done on words; any other twist curve goes through its earthquake.
    pub fn iterate(&self, rep: &HolonomyRep, n: i64) -> Result<Vec<(CurveClass, u64)>, TopologyError> {
        let twist = |t: &CurveClass, x: CurveClass| match dehn_twist(t, &x, n) {
            Err(TopologyError::TwistBasis) => geometric_dehn_twist(rep, t, &x, n, DEFAULT_BALL).map_err(oracle),
            r => r,
        };
        self.base
            .iter()
            .map(|(c, w)| Ok((self.along.iter().try_fold(c.clone(), |acc, t| twist(t, acc))?, *w)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredLamination {
    pub genus: usize,
    pub leaves: Vec<Leaf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist_limit: Option<TwistLimit>,
}

impl MeasuredLamination {
    pub fn empty(genus: usize) -> Self {
        MeasuredLamination { genus, leaves: Vec::new(), twist_limit: None }
    }

    pub fn from_multiloop(genus: usize, m: &[(CurveClass, Weight)]) -> Self {
        MeasuredLamination {
            genus,
            leaves: m.iter().map(|(c, w)| Leaf { curve: c.clone(), weight: *w }).collect(),
            twist_limit: None,
        }
    }

    pub fn twist_limit(genus: usize, t: TwistLimit) -> Self {
        MeasuredLamination { genus, leaves: Vec::new(), twist_limit: Some(t) }
    }

    pub fn heavy_leaves(&self) -> Vec<&CurveClass> {
        self.leaves.iter().filter(|l| l.weight.is_heavy()).map(|l| &l.curve).collect()
    }

    pub fn weight_of(&self, c: &CurveClass) -> Option<Weight> {
        self.leaves.iter().find(|l| &l.curve == c).map(|l| l.weight)
    }

    /// Curves of the support. For a twist limit, the twist curves plus the
    /// n-th iterate of the base.
    pub fn support(&self, rep: &HolonomyRep, n: i64) -> Result<Vec<CurveClass>, TopologyError> {
        let mut out: Vec<CurveClass> = self.leaves.iter().filter(|l| l.weight.is_positive()).map(|l| l.curve.clone()).collect();
        if let Some(t) = &self.twist_limit {
            out.extend(t.along.iter().cloned());
            out.extend(t.iterate(rep, n)?.into_iter().map(|(c, _)| c));
        }
        out.sort_by_key(|c| c.word().unoriented_key());
        out.dedup_by_key(|c| c.word().unoriented_key());
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleOptions {
    pub ball: usize,
    /// Cauchy tolerance on successive twist-iterate estimates.
    pub tol: f64,
    pub max_iterate: i64,
}

impl Default for AngleOptions {
    fn default() -> Self {
        AngleOptions { ball: DEFAULT_BALL, tol: 1e-3, max_iterate: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleReport {
    pub angle: f64,
    pub ball: usize,
    /// Twist iterate used, when an input is a twist limit.
    pub iterate: Option<i64>,
    pub converged: bool,
    /// All crossing counts agreed between ball and ball + 1.
    pub stable: bool,
    pub pairs: usize,
}

fn oracle(e: HolonomyError) -> TopologyError {
    TopologyError::Oracle(e.to_string())
}

fn support_angle(rep: &HolonomyRep, xs: &[CurveClass], ys: &[CurveClass], ball: usize) -> Result<(f64, bool, usize), TopologyError> {
    let mut best: f64 = 0.0;
    let mut stable = true;
    let mut pairs = 0;
    for x in xs {
        for y in ys {
            // fixed argument order makes the result symmetric bit for bit
            let (p, q) = if x.word().unoriented_key() <= y.word().unoriented_key() { (x, y) } else { (y, x) };
            let r = intersection_count(rep, p, q, ball).map_err(oracle)?;
            stable &= r.stable;
            pairs += 1;
            best = best.max(r.max_angle());
        }
    }
    Ok((best.min(PI / 2.0), stable, pairs))
}

/// Supremum of intersection angles between the supports, in [0, π/2].
/// Twist limits are replaced by iterates Twⁿ(N), n = 1, 2, …, until two
/// successive estimates differ by less than `tol`.
pub fn lamination_angle(rep: &HolonomyRep, x: &MeasuredLamination, y: &MeasuredLamination, opts: AngleOptions) -> Result<AngleReport, TopologyError> {
    let limits = x.twist_limit.is_some() || y.twist_limit.is_some();
    if !limits {
        let (angle, stable, pairs) = support_angle(rep, &x.support(rep, 0)?, &y.support(rep, 0)?, opts.ball)?;
        return Ok(AngleReport { angle, ball: opts.ball, iterate: None, converged: true, stable, pairs });
    }
    let mut prev: Option<f64> = None;
    let mut last = AngleReport { angle: 0.0, ball: opts.ball, iterate: None, converged: false, stable: true, pairs: 0 };
    for n in 1..=opts.max_iterate.max(1) {
        let (angle, stable, pairs) = support_angle(rep, &x.support(rep, n)?, &y.support(rep, n)?, opts.ball)?;
        let converged = prev.is_some_and(|p| (p - angle).abs() < opts.tol);
        last = AngleReport { angle, ball: opts.ball, iterate: Some(n), converged, stable, pairs };
        if converged {
            break;
        }
        prev = Some(angle);
    }
    Ok(last)
}
