use serde::{Deserialize, Serialize};

use super::{CurveClass, Letter, TopologyError, Word};

/// Curves along which twists are implemented as explicit automorphisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TwistCurve {
    /// aᵢ (handle index from 1)
    A(usize),
    /// bᵢ
    B(usize),
    /// The separating curve a₁b₁A₁B₁ cutting off the first handle (genus 2).
    Waist,
}

pub fn waist_word() -> Word {
    "a1 b1 A1 B1".parse().expect("literal")
}

impl TwistCurve {
    /// Recognise c (any rotation, either orientation) as a supported curve.
    pub fn recognise(c: &CurveClass) -> Result<TwistCurve, TopologyError> {
        let key = c.word().unoriented_key();
        for i in 1..=c.genus() {
            if key == Word::letter(Letter::a(i)).unoriented_key() {
                return Ok(TwistCurve::A(i));
            }
            if key == Word::letter(Letter::b(i)).unoriented_key() {
                return Ok(TwistCurve::B(i));
            }
        }
        if c.genus() == 2 {
            let wk = waist_word().unoriented_key();
            let other: Word = "a2 b2 A2 B2".parse().expect("literal");
            if key == wk || key == other.unoriented_key() {
                return Ok(TwistCurve::Waist);
            }
        }
        Err(TopologyError::TwistBasis)
    }

    pub fn curve(&self, genus: usize) -> CurveClass {
        let w = match self {
            TwistCurve::A(i) => Word::letter(Letter::a(*i)),
            TwistCurve::B(i) => Word::letter(Letter::b(*i)),
            TwistCurve::Waist => waist_word(),
        };
        CurveClass::new(w, genus).expect("nonempty")
    }

    /// Generator images of the n-th power of the left twist. Each image
    /// fixes the relator word ∏[aᵢ, bᵢ] exactly.
    pub fn automorphism(&self, genus: usize, n: i64) -> Vec<Word> {
        let mut images: Vec<Word> = (1..=2 * genus as i8).map(|k| Word::letter(Letter(k))).collect();
        match self {
            TwistCurve::A(i) => {
                // b ↦ b aⁿ
                let (a, b) = (Letter::a(*i), Letter::b(*i));
                images[b.generator()] = Word::letter(b).mul(&Word::letter(a).pow(n));
            }
            TwistCurve::B(i) => {
                // a ↦ a b⁻ⁿ
                let (a, b) = (Letter::a(*i), Letter::b(*i));
                images[a.generator()] = Word::letter(a).mul(&Word::letter(b).pow(-n));
            }
            TwistCurve::Waist => {
                // first handle conjugated by s⁻ⁿ
                let s = waist_word().pow(-n);
                for l in [Letter::a(1), Letter::b(1)] {
                    images[l.generator()] = Word::letter(l).conjugate(&s);
                }
            }
        }
        images
    }

    /// Action on H₁ as an integer matrix (columns are images of a₁, b₁, …).
    pub fn homology_action(&self, genus: usize, v: &[i64]) -> Vec<i64> {
        let mut out = v.to_vec();
        match self {
            TwistCurve::A(i) => out[2 * i - 2] += v[2 * i - 1],
            TwistCurve::B(i) => out[2 * i - 1] -= v[2 * i - 2],
            TwistCurve::Waist => {}
        }
        let _ = genus;
        out
    }
}

/// Image of `target` under the n-th power of the left Dehn twist along `c`.
pub fn dehn_twist(c: &CurveClass, target: &CurveClass, n: i64) -> Result<CurveClass, TopologyError> {
    let t = TwistCurve::recognise(c)?;
    if n == 0 {
        return Ok(target.clone());
    }
    let images = t.automorphism(target.genus(), n);
    CurveClass::new(target.word().substitute(&images), target.genus())
}

/// Apply a sequence of generator substitutions to a word (first applied first).
pub fn apply_automorphisms(w: &Word, autos: &[Vec<Word>]) -> Word {
    autos.iter().fold(w.clone(), |acc, img| acc.substitute(img))
}

/// Algebraic intersection of homology classes (ω(aᵢ, bᵢ) = 1).
pub fn algebraic_intersection(x: &[i64], y: &[i64]) -> i64 {
    (0..x.len() / 2).map(|i| x[2 * i] * y[2 * i + 1] - x[2 * i + 1] * y[2 * i]).sum()
}
