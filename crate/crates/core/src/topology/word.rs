use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::TopologyError;

/// Generator letter: `+k` is generator k, `-k` its inverse.
/// Generators are numbered a1 = 1, b1 = 2, a2 = 3, b2 = 4, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub i8);

impl Letter {
    pub fn a(i: usize) -> Letter {
        Letter(2 * i as i8 - 1)
    }

    pub fn b(i: usize) -> Letter {
        Letter(2 * i as i8)
    }

    pub fn inv(self) -> Letter {
        Letter(-self.0)
    }

    /// Zero-based generator slot.
    pub fn generator(self) -> usize {
        self.0.unsigned_abs() as usize - 1
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    /// Index into a table holding each generator followed by its inverse.
    pub fn slot(self) -> usize {
        2 * self.generator() + self.is_inverse() as usize
    }

    pub fn all(genus: usize) -> Vec<Letter> {
        (1..=2 * genus as i8).flat_map(|k| [Letter(k), Letter(-k)]).collect()
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.generator();
        let handle = g / 2 + 1;
        let ch = match (g % 2, self.is_inverse()) {
            (0, false) => 'a',
            (0, true) => 'A',
            (_, false) => 'b',
            (_, true) => 'B',
        };
        write!(f, "{ch}{handle}")
    }
}

/// Freely reduced word in the surface generators.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_generator(&self) -> usize {
        self.0.iter().map(|l| l.generator() + 1).max().unwrap_or(0)
    }

    pub fn mul(&self, o: &Word) -> Word {
        Word::from_letters(self.0.iter().chain(o.0.iter()).copied())
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::empty();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// w · self · w⁻¹
    pub fn conjugate(&self, w: &Word) -> Word {
        w.mul(self).mul(&w.inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(f), Some(l)) => self.0.len() == 1 || *f != l.inv(),
            _ => true,
        }
    }

    /// Returns (u, core) with self = u · core · u⁻¹ and core cyclically reduced.
    pub fn cyclic_split(&self) -> (Word, Word) {
        let v = &self.0;
        let mut k = 0;
        while v.len() >= 2 * (k + 1) && v[k] == v[v.len() - 1 - k].inv() {
            k += 1;
        }
        (Word(v[..k].to_vec()), Word(v[k..v.len() - k].to_vec()))
    }

    pub fn cyclic_reduce(&self) -> Word {
        self.cyclic_split().1
    }

    pub fn rotate(&self, k: usize) -> Word {
        let n = self.0.len();
        if n == 0 {
            return Word::empty();
        }
        let mut v = self.0[k % n..].to_vec();
        v.extend_from_slice(&self.0[..k % n]);
        Word(v)
    }

    /// Least rotation; a canonical form for conjugacy in the free group.
    pub fn least_rotation(&self) -> Word {
        let w = self.cyclic_reduce();
        (0..w.len().max(1)).map(|k| w.rotate(k)).min().unwrap_or_default()
    }

    /// Canonical form for unoriented free-group conjugacy classes.
    pub fn unoriented_key(&self) -> Word {
        self.least_rotation().min(self.inverse().least_rotation())
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }

    /// Exponent sum per generator: the class in H₁(S; Z).
    pub fn homology(&self, genus: usize) -> Vec<i64> {
        let mut h = vec![0i64; 2 * genus];
        for l in &self.0 {
            h[l.generator()] += if l.is_inverse() { -1 } else { 1 };
        }
        h
    }

    /// Substitute each generator by a word.
    pub fn substitute(&self, images: &[Word]) -> Word {
        Word::from_letters(self.0.iter().flat_map(|l| {
            let img = &images[l.generator()];
            if l.is_inverse() {
                img.inverse().0
            } else {
                img.0.clone()
            }
        }))
    }

    /// All freely reduced words of length exactly `n`.
    pub fn all_of_length(genus: usize, n: usize) -> Vec<Word> {
        let letters = Letter::all(genus);
        let mut layer = vec![Word::empty()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(layer.len() * (letters.len() - 1));
            for w in &layer {
                for &l in &letters {
                    if w.0.last() != Some(&l.inv()) {
                        let mut v = w.0.clone();
                        v.push(l);
                        next.push(Word(v));
                    }
                }
            }
            layer = next;
        }
        layer
    }

    /// All freely reduced words of length ≤ r, shortlex order.
    pub fn ball(genus: usize, r: usize) -> Vec<Word> {
        (0..=r).flat_map(|n| Word::all_of_length(genus, n)).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl FromStr for Word {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut i = 0;
        while i < chars.len() {
            let (base, inv) = match chars[i] {
                'a' => (0, false),
                'A' => (0, true),
                'b' => (1, false),
                'B' => (1, true),
                other => return Err(TopologyError::Parse(format!("unexpected {other:?} in {s:?}"))),
            };
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let handle: usize = chars[start..i]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| TopologyError::Parse(format!("missing handle index in {s:?}")))?;
            if handle == 0 || handle > 60 {
                return Err(TopologyError::Parse(format!("handle index {handle} out of range")));
            }
            let k = (2 * handle - 1 + base) as i8;
            letters.push(Letter(if inv { -k } else { k }));
        }
        Ok(Word::from_letters(letters))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Convenience parser for literals in code and tests.
pub fn w(s: &str) -> Word {
    s.parse().expect("valid word literal")
}
