use serde::{Deserialize, Serialize};

use super::{HolonomyError, HolonomyRep};
use crate::geometry::{CPoint, FixedPoints, MobiusMap};
use crate::topology::{CurveClass, Letter, Word};
use crate::{Mobius, Point};

const POS_TOL: f64 = 1e-6;

/// A lift of c2 crossing the fundamental segment of axis(c1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftCrossing {
    /// Position along axis(c1) from the base point, in [0, ℓ(c1)).
    pub position: f64,
    /// Word of the deck transformation of this lift.
    pub conjugate: Word,
    /// axis(c1) passes from the left of the lift to its right.
    pub from_left: bool,
}

fn on_boundary(p: &Point) -> bool {
    p.chordal(&CPoint::Infinity) < 1e-9 || p.chordal(&CPoint::real(0.0)) < 1e-9
}

/// Lifts of c2 met by one period of axis(c1), found among conjugates
/// (c1ᵏ P h) rot(c2) (c1ᵏ P h)⁻¹ with P a prefix of c1 and |h| ≤ ball.
pub fn crossing_lifts(rep: &HolonomyRep, c1: &CurveClass, c2: &CurveClass, ball: usize) -> Result<Vec<LiftCrossing>, HolonomyError> {
    let base = rep.fuchsian_base()?;
    let rep = &base;
    let g1 = rep.curve(c1);
    let FixedPoints::Two(att, rp) = g1.fixed_points()? else {
        return Err(HolonomyError::NotLoxodromic(c1.to_string()));
    };
    let length = g1.translation_length()?;
    let chart: Mobius = MobiusMap::normalizer(&rp, &att)?.inverse();
    let w1 = c1.word();
    let prefixes: Vec<(Word, Mobius)> = (0..w1.len()).map(|k| (w1.prefix(k), chart * rep.eval(&w1.prefix(k)))).collect();
    let letters = Letter::all(rep.genus());
    let mut found: Vec<LiftCrossing> = Vec::new();
    let w2 = c2.word();
    for m in 0..w2.len() {
        let rot = w2.rotate(m);
        let rotated = rep.eval(&rot);
        let mut stack: Vec<(Word, Mobius)> = vec![(Word::empty(), Mobius::identity())];
        while let Some((h, hm)) = stack.pop() {
            for (pw, pm) in &prefixes {
                let g = *pm * hm;
                let conj = (g * rotated * g.inverse()).renormalized();
                let Ok(FixedPoints::Two(a, r)) = conj.fixed_points() else { continue };
                if on_boundary(&a) || on_boundary(&r) {
                    continue;
                }
                let (u, v) = (r.finite().unwrap().re, a.finite().unwrap().re);
                if u * v >= 0.0 {
                    continue;
                }
                let t = (-u * v).sqrt().ln();
                let k = (t / length).floor();
                let position = t - k * length;
                let word = w1.pow(-(k as i64)).mul(pw).mul(&h);
                found.push(LiftCrossing { position, conjugate: rot.conjugate(&word), from_left: u > v });
            }
            if h.len() < ball {
                for &l in &letters {
                    if h.letters().first() == Some(&l.inv()) {
                        continue;
                    }
                    stack.push((Word::letter(l).mul(&h), (*rep.letter(l) * hm).renormalized()));
                }
            }
        }
    }
    found.sort_by(|a, b| a.position.total_cmp(&b.position).then(a.conjugate.len().cmp(&b.conjugate.len())).then(a.conjugate.cmp(&b.conjugate)));
    let mut out: Vec<LiftCrossing> = Vec::new();
    for c in found {
        let dup = out.iter().any(|o| {
            let d = (o.position - c.position).abs();
            d.min(length - d) < POS_TOL * (1.0 + length)
        });
        if !dup {
            out.push(c);
        } else if let Some(o) = out.iter_mut().find(|o| (o.position - c.position).abs() < POS_TOL * (1.0 + length)) {
            if c.conjugate.len() < o.conjugate.len() {
                *o = c;
            }
        }
    }
    out.sort_by(|a, b| a.position.total_cmp(&b.position));
    Ok(out)
}

/// Left Dehn twist Tᵐ_c(x) for any simple c, as the left earthquake of
/// length m·ℓ(c) along c: ρ(T(x)) = E₁⋯Eₙ ρ(x), one factor per lift of c
/// crossed by a period of axis(x).
pub fn geometric_dehn_twist(rep: &HolonomyRep, c: &CurveClass, x: &CurveClass, m: i64, ball: usize) -> Result<CurveClass, HolonomyError> {
    if m == 0 {
        return Ok(x.clone());
    }
    let lifts = crossing_lifts(rep, x, c, ball)?;
    let mut word = Word::empty();
    for l in &lifts {
        let (g, core) = l.conjugate.cyclic_split();
        let e = core.pow(if l.from_left { m } else { -m }).conjugate(&g);
        word = word.mul(&e);
    }
    CurveClass::new(word.mul(x.word()), x.genus()).map_err(|e| HolonomyError::Shape(e.to_string()))
}
