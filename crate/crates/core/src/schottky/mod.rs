//! Handles, decomposition loops, ping-pong certificates for Schottky
//! groups, and the density experiment in PML.

mod density;
mod pingpong;

pub use density::{
    battery, density_batch, density_experiment, oracle_reps, projective_distance, projectivize, random_multiloop_targets, DensityCaps,
    DensityResult, IntersectionOracle, TargetKind, BATTERY, ORACLE_LENGTHS, ORACLE_MAX_LENGTH,
};
pub use pingpong::{ping_pong_certify, verify_certificate, DiskPair, PingPongCaps, SchottkyCertificate, SphereCap, Verification};

use serde::{Deserialize, Serialize};

use crate::geometry::{FixedPoints, MobiusKind};
use crate::holonomy::{build_from_fn, commutator_trace, crossings_at_ball, FnCoordinates, HolonomyError, HolonomyRep};
use crate::topology::{CurveCatalog, CurveClass, TopologyError, Word};
use crate::{Mobius, Point};

pub const NONSWAP_MARGIN: f64 = 1e-6;
pub const NONELEMENTARY_MARGIN: f64 = 1e-6;
pub const LOXODROMIC_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchottkyError {
    #[error("topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("holonomy: {0}")]
    Holonomy(#[from] HolonomyError),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("handle caps exhausted; last certificate failed: {}", .0.failures.join("; "))]
    HandleCaps(Box<HandleCertificate>),
    #[error("cap exhausted: {0}")]
    CapExhausted(String),
    #[error("density caps exhausted, best distance {:.3e} above {:.3e}", .0.distance, .0.eps)]
    DensityCaps(Box<DensityResult>),
}

/// The Fuchsian representation used for every topological question: the
/// FN base when ρ comes from FN coordinates, otherwise the (2, 2, 2, 0, 0, 0)
/// structure. Topology only sees the marking, which all of these share.
pub fn topology_rep(rep: &HolonomyRep) -> Result<HolonomyRep, SchottkyError> {
    if rep.origin().is_some() {
        return Ok(rep.fuchsian_base()?);
    }
    if rep.genus() != 2 {
        return Err(SchottkyError::Precondition(format!("no reference structure in genus {}", rep.genus())));
    }
    Ok(build_from_fn(&FnCoordinates::genus2([2.0; 3], [0.0; 3]))?)
}

fn pair(z: crate::C64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandleCertificate {
    pub a: CurveClass,
    pub b: CurveClass,
    /// Geometric intersection number, None when the oracle gave no stable count.
    pub intersection: Option<usize>,
    pub simple: [bool; 2],
    pub trace_sq: [[f64; 2]; 2],
    /// Distance of tr² from [0, 4].
    pub loxodromic_margin: [f64; 2],
    pub commutator_trace: [f64; 2],
    /// |tr[ρ(a), ρ(b)] − 2|.
    pub nonelementary_margin: f64,
    /// Chordal distance between ρ(b)·p and the other fixed point q of ρ(a),
    /// minimised over both orders.
    pub nonswap_margin: f64,
    pub failures: Vec<String>,
}

impl HandleCertificate {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The pair is ⟨a b^q, b⟩ (seed modified, first) or ⟨b, a b^q⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandleForm {
    SeedFirst,
    SeedSecond,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Handle {
    pub a: CurveClass,
    pub b: CurveClass,
    pub seed: CurveClass,
    /// Set when a separating seed was traded for a disjoint loop.
    pub replaced_seed: Option<CurveClass>,
    pub partner: CurveClass,
    pub q: i64,
    pub form: HandleForm,
    pub certificate: HandleCertificate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HandleCaps {
    /// Word length of catalogue curves tried as partners or replacements.
    pub word_len: usize,
    /// Largest |q| in the modifications.
    pub max_q: i64,
}

impl Default for HandleCaps {
    fn default() -> Self {
        HandleCaps { word_len: 3, max_q: 4 }
    }
}

fn nonswap_margin(a: &Mobius, b: &Mobius) -> f64 {
    let Ok(FixedPoints::Two(p, q)) = a.fixed_points() else { return 0.0 };
    let d = |x: &Point, y: &Point| b.apply(x).chordal(y);
    d(&p, &q).min(d(&q, &p))
}

fn certify_pair(rep: &HolonomyRep, catalog: &mut CurveCatalog, a: &CurveClass, b: &CurveClass) -> Result<HandleCertificate, SchottkyError> {
    let mut failures = Vec::new();
    let (ia, ib) = (catalog.identify(a)?, catalog.identify(b)?);
    let simple = [catalog.entry(ia).simple, catalog.entry(ib).simple];
    for (c, s) in [a, b].iter().zip(simple) {
        if !s {
            failures.push(format!("{c} is not simple"));
        }
    }
    let intersection = catalog.intersection(ia, ib).ok();
    if intersection != Some(1) {
        failures.push(format!("i({a}, {b}) = {intersection:?}, not 1"));
    }
    let (ma, mb) = (rep.curve(a), rep.curve(b));
    let (ca, cb) = (ma.classify(), mb.classify());
    let seg = |t: crate::C64| (t - crate::C64::new(t.re.clamp(0.0, 4.0), 0.0)).norm();
    let loxodromic_margin = [seg(ca.tr_sq), seg(cb.tr_sq)];
    for (c, k, m) in [(a, ca.kind, loxodromic_margin[0]), (b, cb.kind, loxodromic_margin[1])] {
        if k != MobiusKind::Loxodromic || m <= LOXODROMIC_MARGIN {
            failures.push(format!("ρ({c}) not loxodromic ({k:?}, margin {m:.3e})"));
        }
    }
    let ct = commutator_trace(&ma, &mb);
    let nonelementary_margin = (ct - crate::C64::new(2.0, 0.0)).norm();
    if nonelementary_margin <= NONELEMENTARY_MARGIN {
        failures.push(format!("tr[ρ(a), ρ(b)] within {nonelementary_margin:.3e} of 2"));
    }
    let nonswap = nonswap_margin(&ma, &mb);
    if nonswap <= NONSWAP_MARGIN {
        failures.push(format!("ρ(b) swaps the fixed points of ρ(a) (margin {nonswap:.3e})"));
    }
    Ok(HandleCertificate {
        a: a.clone(),
        b: b.clone(),
        intersection,
        simple,
        trace_sq: [pair(ca.tr_sq), pair(cb.tr_sq)],
        loxodromic_margin,
        commutator_trace: pair(ct),
        nonelementary_margin,
        nonswap_margin: nonswap,
        failures,
    })
}

/// Re-run every certificate of the pair from scratch.
pub fn verify_handle(rep: &HolonomyRep, a: &CurveClass, b: &CurveClass) -> Result<HandleCertificate, SchottkyError> {
    let mut catalog = CurveCatalog::new(&topology_rep(rep)?)?;
    certify_pair(rep, &mut catalog, a, b)
}

fn q_order(max_q: i64) -> Vec<i64> {
    let mut out = vec![0];
    for q in 1..=max_q {
        out.extend([q, -q]);
    }
    out
}

/// A handle through a (modification of a) simple seed loop. Partners are
/// catalogue curves meeting the seed once; the pair is modified to
/// ⟨a b^q, b⟩ or ⟨b, a b^q⟩ until every certificate passes.
pub fn find_handle(rep: &HolonomyRep, seed: &CurveClass, caps: &HandleCaps) -> Result<Handle, SchottkyError> {
    let mut catalog = CurveCatalog::new(&topology_rep(rep)?)?;
    let sid = catalog.identify(seed)?;
    if !catalog.entry(sid).simple {
        return Err(SchottkyError::Precondition(format!("seed {seed} is not simple")));
    }
    let pool = catalog.simple_curves(caps.word_len)?;
    let (a, replaced_seed) = if seed.is_separating() {
        let mut found = None;
        for &id in &pool {
            if id != sid && !catalog.curve(id).is_separating() && catalog.intersection(sid, id)? == 0 {
                found = Some(catalog.curve(id).clone());
                break;
            }
        }
        let a = found.ok_or_else(|| SchottkyError::CapExhausted(format!("no non-separating loop disjoint from {seed} up to length {}", caps.word_len)))?;
        (a, Some(seed.clone()))
    } else {
        (seed.clone(), None)
    };
    let aid = catalog.identify(&a)?;
    let mut last: Option<HandleCertificate> = None;
    for &id in &pool {
        if id == aid || !catalog.may_intersect_exactly(aid, id, 1) || catalog.intersection(aid, id).ok() != Some(1) {
            continue;
        }
        let b = catalog.curve(id).clone();
        for form in [HandleForm::SeedFirst, HandleForm::SeedSecond] {
            for q in q_order(caps.max_q) {
                let m = CurveClass::new(a.word().mul(&b.word().pow(q)), a.genus())?;
                let (x, y) = match form {
                    HandleForm::SeedFirst => (m, b.clone()),
                    HandleForm::SeedSecond => (b.clone(), m),
                };
                let cert = certify_pair(rep, &mut catalog, &x, &y)?;
                if cert.passed() {
                    return Ok(Handle { a: x, b: y, seed: seed.clone(), replaced_seed, partner: b, q, form, certificate: cert });
                }
                last = Some(cert);
            }
        }
    }
    match last {
        Some(c) => Err(SchottkyError::HandleCaps(Box::new(c))),
        None => Err(SchottkyError::CapExhausted(format!("no partner meeting {a} once up to length {}", caps.word_len))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoopCaps {
    pub k_max: i64,
    pub n_min: i64,
    pub n_max: i64,
    /// Smallest accepted translation length of ρ(d^n x).
    pub length_floor: f64,
}

impl Default for LoopCaps {
    fn default() -> Self {
        LoopCaps { k_max: 4, n_min: 1, n_max: 4, length_floor: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionLoop {
    pub curve: CurveClass,
    pub k: i64,
    pub n: i64,
    /// d = a^k b y, the path y b a^k composed right to left.
    pub d: Word,
    pub translation_length: f64,
    pub trace_sq: [f64; 2],
    pub loxodromic_margin: f64,
    /// Candidates rejected before this one, with the reason.
    pub rejected: Vec<(i64, i64, String)>,
}

fn check_loop(rep: &HolonomyRep, catalog: &mut CurveCatalog, c: &CurveClass, ba: &CurveClass, floor: f64) -> Result<Result<(f64, f64), String>, SchottkyError> {
    let m = rep.curve(c);
    let cls = m.classify();
    if cls.kind != MobiusKind::Loxodromic {
        return Ok(Err(format!("{:?}", cls.kind)));
    }
    let len = m.translation_length().map_err(HolonomyError::from)?;
    if len < floor {
        return Ok(Err(format!("translation length {len:.3e} below floor")));
    }
    if c.is_separating() {
        return Ok(Err("separating".into()));
    }
    // crossings among the first translates are genuine
    if crossings_at_ball(catalog.rep(), c, c, 0)?.0 > 0 {
        return Ok(Err("not simple".into()));
    }
    let id = catalog.identify(c)?;
    if !catalog.entry(id).simple {
        return Ok(Err("not simple".into()));
    }
    let bid = catalog.identify(ba)?;
    match catalog.intersection(id, bid) {
        Ok(0) => {}
        Ok(i) => return Ok(Err(format!("meets b a^k {i} times"))),
        Err(e) => return Ok(Err(e.to_string())),
    }
    let t = cls.tr_sq;
    Ok(Ok((len, (t - crate::C64::new(t.re.clamp(0.0, 4.0), 0.0)).norm())))
}

/// The loop d^n x with d = y b a^k for the smallest (k, n) in the caps,
/// ordered by k + n then k. Paths compose right to left, so the words are
/// d = a^k b y and d^n x; the first candidate (k = 0, n = 1) is x b y.
pub fn build_decomposition_loop(rep: &HolonomyRep, h: &Handle, x: &CurveClass, y: &CurveClass, caps: &LoopCaps) -> Result<DecompositionLoop, SchottkyError> {
    let mut catalog = CurveCatalog::new(&topology_rep(rep)?)?;
    let ids: Vec<usize> = [&h.a, &h.b, x, y].iter().map(|c| catalog.identify(c)).collect::<Result<_, _>>()?;
    for (c, &id) in [x, y].iter().zip(&ids[2..]) {
        if !catalog.entry(id).simple {
            return Err(SchottkyError::Precondition(format!("{c} is not simple")));
        }
    }
    if catalog.intersection(ids[2], ids[3])? != 1 {
        return Err(SchottkyError::Precondition(format!("{x} and {y} do not meet once")));
    }
    for &i in &ids[2..] {
        for &j in &ids[..2] {
            if catalog.intersection(i, j)? != 0 {
                return Err(SchottkyError::Precondition(format!("{} meets {}", catalog.curve(i), catalog.curve(j))));
            }
        }
    }
    let mut rejected = Vec::new();
    for total in caps.n_min.max(0)..=caps.k_max + caps.n_max {
        for k in 0..=caps.k_max.min(total) {
            let n = total - k;
            if n < caps.n_min || n > caps.n_max {
                continue;
            }
            let ak = h.a.word().pow(k);
            let d = ak.mul(h.b.word()).mul(y.word());
            let c = CurveClass::new(d.pow(n).mul(x.word()), x.genus())?;
            let ba = CurveClass::new(h.b.word().mul(&ak), x.genus())?;
            match check_loop(rep, &mut catalog, &c, &ba, caps.length_floor)? {
                Ok((translation_length, loxodromic_margin)) => {
                    let t = rep.curve(&c).trace_sq();
                    return Ok(DecompositionLoop { curve: c, k, n, d, translation_length, trace_sq: [t.re, t.im], loxodromic_margin, rejected });
                }
                Err(why) => rejected.push((k, n, why)),
            }
        }
    }
    Err(SchottkyError::CapExhausted(format!("no decomposition loop with k ≤ {}, n ≤ {}", caps.k_max, caps.n_max)))
}
