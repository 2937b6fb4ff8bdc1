use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SchottkyError;
use crate::holonomy::{build_from_fn, stable_intersection, FnCoordinates, HolonomyRep};
use crate::lamination::{MeasuredLamination, TwistLimit, Weight};
use crate::topology::{w, CurveCatalog, CurveClass, Word};

/// The reference pants curves a1, a2, s = a1 b1 A1 B1, then six simple
/// transversals: b1, b2, a1 b1, a2 b2, and a1 a2, b1 A2 which cross s
/// twice each.
pub const BATTERY: [&str; 9] = ["a1", "a2", "a1 b1 A1 B1", "b1", "b2", "a1 b1", "a2 b2", "a1 a2", "b1 A2"];

/// FN lengths of the Fuchsian structures on which intersection numbers are
/// counted, all twists zero. The second has short a-curves, which keeps
/// long twist iterates along them within reach of the crossing oracle.
pub const ORACLE_LENGTHS: [[f64; 3]; 2] = [[2.0, 2.0, 2.0], [0.6, 0.6, 1.0]];

/// A structure is consulted only when both curves are at most this long
/// there; beyond it the crossing positions lose too many digits.
pub const ORACLE_MAX_LENGTH: f64 = 20.0;

pub fn battery() -> Vec<CurveClass> {
    BATTERY.iter().map(|s| CurveClass::new(w(s), 2).expect("literal")).collect()
}

pub fn oracle_reps() -> Vec<HolonomyRep> {
    ORACLE_LENGTHS.iter().map(|l| build_from_fn(&FnCoordinates::genus2(*l, [0.0; 3])).expect("fixed oracle structure")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DensityCaps {
    /// Largest common scale N for integer weights round(N w / max w).
    pub max_scale: u64,
    /// Largest twist iterate n.
    pub max_twist: i64,
    pub ball: usize,
    pub max_ball: usize,
}

impl Default for DensityCaps {
    fn default() -> Self {
        DensityCaps { max_scale: 64, max_twist: 40, ball: 2, max_ball: 4 }
    }
}

/// Memoised geometric intersection numbers. Every structure where both
/// curves are short enough is asked; the stable answers must agree and at
/// least one must exist.
pub struct IntersectionOracle {
    reps: Vec<HolonomyRep>,
    battery: Vec<CurveClass>,
    ball: usize,
    max_ball: usize,
    memo: HashMap<(Word, Word), usize>,
}

impl IntersectionOracle {
    pub fn new(caps: &DensityCaps) -> Self {
        IntersectionOracle { reps: oracle_reps(), battery: battery(), ball: caps.ball, max_ball: caps.max_ball, memo: HashMap::new() }
    }

    /// The structure used for twists that need an earthquake.
    pub fn rep(&self) -> &HolonomyRep {
        &self.reps[0]
    }

    pub fn count(&mut self, x: &CurveClass, y: &CurveClass) -> Result<usize, SchottkyError> {
        let key = (x.word().unoriented_key(), y.word().unoriented_key());
        let key = if key.0 <= key.1 { key } else { (key.1, key.0) };
        if let Some(&n) = self.memo.get(&key) {
            return Ok(n);
        }
        // the longer word goes first: its prefixes carry the conjugators
        let (p, q) = if x.word().len() >= y.word().len() { (x, y) } else { (y, x) };
        let mut answer: Option<usize> = None;
        for rep in &self.reps {
            if rep.geodesic_length(p)?.max(rep.geodesic_length(q)?) > ORACLE_MAX_LENGTH {
                continue;
            }
            let r = stable_intersection(rep, p, q, self.ball, self.max_ball)?;
            if !r.stable {
                continue;
            }
            match answer {
                Some(a) if a != r.count => {
                    return Err(SchottkyError::Precondition(format!("structures disagree on i({p}, {q}): {a} and {}", r.count)));
                }
                _ => answer = Some(r.count),
            }
        }
        let n = answer.ok_or_else(|| SchottkyError::Precondition(format!("no stable count of i({p}, {q}) up to ball {}", self.max_ball)))?;
        self.memo.insert(key, n);
        Ok(n)
    }

    /// Σ w · i(c, β) over the multiloop, for each battery curve β.
    pub fn vector(&mut self, multiloop: &[(CurveClass, f64)]) -> Result<Vec<f64>, SchottkyError> {
        let mut v = vec![0.0; self.battery.len()];
        for (c, wt) in multiloop {
            for k in 0..self.battery.len() {
                let b = self.battery[k].clone();
                v[k] += wt * self.count(c, &b)? as f64;
            }
        }
        Ok(v)
    }

    fn check_multiloop(&mut self, curves: &[&CurveClass]) -> Result<(), SchottkyError> {
        for (i, c) in curves.iter().enumerate() {
            if c.genus() != 2 {
                return Err(SchottkyError::Precondition(format!("{c} is not a genus-2 curve")));
            }
            if self.count(c, c)? != 0 {
                return Err(SchottkyError::Precondition(format!("{c} is not simple")));
            }
            for d in &curves[..i] {
                if self.count(c, d)? != 0 {
                    return Err(SchottkyError::Precondition(format!("{c} meets {d}")));
                }
            }
        }
        Ok(())
    }
}

/// Divide by the largest entry; None for the zero vector.
pub fn projectivize(v: &[f64]) -> Option<Vec<f64>> {
    let m = v.iter().copied().fold(0.0, f64::max);
    (m > 0.0).then(|| v.iter().map(|x| x / m).collect())
}

/// Sup-norm distance of the max-normalised vectors.
pub fn projective_distance(u: &[f64], v: &[f64]) -> Option<f64> {
    let (u, v) = (projectivize(u)?, projectivize(v)?);
    Some(u.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Multiloop,
    TwistLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityResult {
    pub kind: TargetKind,
    /// Multiloop with weights 2πk.
    pub approximant: MeasuredLamination,
    /// The scale N, or the twist iterate n.
    pub parameter: u64,
    pub target_vector: Vec<f64>,
    pub approximant_vector: Vec<f64>,
    pub distance: f64,
    pub eps: f64,
    pub within_eps: bool,
}

fn lamination(m: &[(CurveClass, u64)]) -> MeasuredLamination {
    let m: Vec<(CurveClass, Weight)> = m.iter().filter(|(_, k)| *k > 0).map(|(c, k)| (c.clone(), Weight::TwoPi(*k))).collect();
    MeasuredLamination::from_multiloop(2, &m)
}

fn as_real(m: &[(CurveClass, u64)]) -> Vec<(CurveClass, f64)> {
    m.iter().map(|(c, k)| (c.clone(), *k as f64)).collect()
}

fn multiloop_target(oracle: &mut IntersectionOracle, target: &MeasuredLamination, eps: f64, caps: &DensityCaps) -> Result<DensityResult, SchottkyError> {
    let mut leaves: Vec<(CurveClass, f64)> = Vec::new();
    for l in &target.leaves {
        match l.weight.value() {
            Some(x) if x.is_finite() && x > 0.0 => leaves.push((l.curve.clone(), x)),
            Some(_) => {}
            None => return Err(SchottkyError::Precondition(format!("heavy leaf {} has no projective class", l.curve))),
        }
    }
    if leaves.is_empty() {
        return Err(SchottkyError::Precondition("empty target".into()));
    }
    oracle.check_multiloop(&leaves.iter().map(|(c, _)| c).collect::<Vec<_>>())?;
    let tv = oracle.vector(&leaves)?;
    let vmax = projectivize(&tv).ok_or_else(|| SchottkyError::Precondition("target misses every battery curve".into()))?;
    let exact: Option<Vec<(CurveClass, u64)>> = target
        .leaves
        .iter()
        .map(|l| match l.weight {
            Weight::TwoPi(k) => Some((l.curve.clone(), k)),
            _ => None,
        })
        .collect();
    let wmax = leaves.iter().map(|(_, x)| *x).fold(0.0, f64::max);
    let mut best: Option<DensityResult> = None;
    let candidates = exact.map(|e| (0, e)).into_iter().chain((1..=caps.max_scale).map(|n| {
        let m = leaves.iter().map(|(c, x)| (c.clone(), (n as f64 * x / wmax).round() as u64)).collect::<Vec<_>>();
        (n, m)
    }));
    for (n, m) in candidates {
        let av = oracle.vector(&as_real(&m))?;
        let Some(d) = projective_distance(&tv, &av) else { continue };
        let r = DensityResult {
            kind: TargetKind::Multiloop,
            approximant: lamination(&m),
            parameter: n,
            target_vector: vmax.clone(),
            approximant_vector: projectivize(&av).expect("nonzero"),
            distance: d,
            eps,
            within_eps: d < eps,
        };
        if r.within_eps {
            return Ok(r);
        }
        if best.as_ref().is_none_or(|b| d < b.distance) {
            best = Some(r);
        }
    }
    Err(match best {
        Some(b) => SchottkyError::DensityCaps(Box::new(b)),
        None => SchottkyError::CapExhausted("no nonzero approximant".into()),
    })
}

fn twist_target(oracle: &mut IntersectionOracle, t: &TwistLimit, eps: f64, caps: &DensityCaps) -> Result<DensityResult, SchottkyError> {
    if t.base.is_empty() || t.base.iter().all(|(_, k)| *k == 0) {
        return Err(SchottkyError::Precondition("empty twist-limit base".into()));
    }
    oracle.check_multiloop(&t.base.iter().map(|(c, _)| c).collect::<Vec<_>>())?;
    oracle.check_multiloop(&t.along.iter().collect::<Vec<_>>())?;
    let base = as_real(&t.base);
    // lim Twⁿ(N) / n = Σ i(N, c) c
    let mut limit = Vec::new();
    for c in &t.along {
        let mut k = 0.0;
        for (x, wt) in &base {
            k += wt * oracle.count(x, c)? as f64;
        }
        if k > 0.0 {
            limit.push((c.clone(), k));
        }
    }
    let tv = if limit.is_empty() { oracle.vector(&base)? } else { oracle.vector(&limit)? };
    let vmax = projectivize(&tv).ok_or_else(|| SchottkyError::Precondition("target misses every battery curve".into()))?;
    let rep = oracle.rep().clone();
    let mut best: Option<DensityResult> = None;
    let start = if limit.is_empty() { 0 } else { 1 };
    for n in start..=caps.max_twist {
        let m = t.iterate(&rep, n)?;
        let av = oracle.vector(&as_real(&m))?;
        let Some(d) = projective_distance(&tv, &av) else { continue };
        let r = DensityResult {
            kind: TargetKind::TwistLimit,
            approximant: lamination(&m),
            parameter: n as u64,
            target_vector: vmax.clone(),
            approximant_vector: projectivize(&av).expect("nonzero"),
            distance: d,
            eps,
            within_eps: d < eps,
        };
        if r.within_eps {
            return Ok(r);
        }
        if best.as_ref().is_none_or(|b| d < b.distance) {
            best = Some(r);
        }
    }
    Err(match best {
        Some(b) => SchottkyError::DensityCaps(Box::new(b)),
        None => SchottkyError::CapExhausted("no nonzero iterate".into()),
    })
}

/// A multiloop class within ε of the target in the battery metric. Weighted
/// multiloops are approximated by integer weights at the smallest common
/// scale that works; twist limits by the first close enough iterate.
/// Intersection numbers are counted on the fixed oracle structures, since
/// they do not depend on the Fuchsian ρ.
pub fn density_experiment(rep: &HolonomyRep, target: &MeasuredLamination, eps: f64, caps: &DensityCaps) -> Result<DensityResult, SchottkyError> {
    let mut oracle = IntersectionOracle::new(caps);
    density_with(&mut oracle, rep, target, eps, caps)
}

fn density_with(oracle: &mut IntersectionOracle, rep: &HolonomyRep, target: &MeasuredLamination, eps: f64, caps: &DensityCaps) -> Result<DensityResult, SchottkyError> {
    if !rep.is_fuchsian() {
        return Err(SchottkyError::Precondition("density experiment needs a Fuchsian representation".into()));
    }
    if rep.genus() != 2 || target.genus != 2 {
        return Err(SchottkyError::Precondition("the battery is defined for genus 2".into()));
    }
    if !(eps > 0.0) {
        return Err(SchottkyError::Precondition(format!("eps = {eps}")));
    }
    match &target.twist_limit {
        Some(t) if target.leaves.is_empty() => twist_target(oracle, t, eps, caps),
        Some(_) => Err(SchottkyError::Precondition("mixed leaves and twist limit".into())),
        None => multiloop_target(oracle, target, eps, caps),
    }
}

/// Run every target, in parallel chunks, each chunk with its own oracle.
pub fn density_batch(rep: &HolonomyRep, targets: &[MeasuredLamination], eps: f64, caps: &DensityCaps, threads: usize) -> Vec<Result<DensityResult, SchottkyError>> {
    let threads = if threads == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { threads };
    let chunk = targets.len().div_ceil(threads.max(1)).max(1);
    let mut out = Vec::with_capacity(targets.len());
    std::thread::scope(|sc| {
        let handles: Vec<_> = targets
            .chunks(chunk)
            .map(|part| {
                sc.spawn(move || {
                    let mut oracle = IntersectionOracle::new(caps);
                    part.iter().map(|t| density_with(&mut oracle, rep, t, eps, caps)).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            out.extend(h.join().expect("worker panicked"));
        }
    });
    out
}

/// Random weighted multiloops drawn with ChaCha8 seeded by `seed`: one to
/// three pairwise disjoint simple curves of word length ≤ 3, weights
/// uniform in [0.1, 1).
pub fn random_multiloop_targets(seed: u64, count: usize) -> Result<Vec<MeasuredLamination>, SchottkyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut catalog = CurveCatalog::new(&oracle_reps()[0])?;
    let pool = catalog.simple_curves(3)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let size = rng.gen_range(1..=3usize);
        let mut chosen = vec![pool[rng.gen_range(0..pool.len())]];
        for _ in 0..64 {
            if chosen.len() == size {
                break;
            }
            let c = pool[rng.gen_range(0..pool.len())];
            if chosen.contains(&c) {
                continue;
            }
            // an unstable count rejects the candidate
            let disjoint = chosen.iter().all(|&d| catalog.intersection(c, d).ok() == Some(0));
            if disjoint {
                chosen.push(c);
            }
        }
        let m: Vec<(CurveClass, Weight)> = chosen.iter().map(|&id| (catalog.curve(id).clone(), Weight::Real(rng.gen_range(0.1..1.0)))).collect();
        out.push(MeasuredLamination::from_multiloop(2, &m));
    }
    Ok(out)
}
