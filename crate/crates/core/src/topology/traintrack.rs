use serde::{Deserialize, Serialize};

use super::{CurveClass, Letter, Word};

/// A branch runs from the outgoing side of one switch to the incoming side
/// of another and spells `label` when traversed forwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub name: String,
    pub label: Word,
    pub from: usize,
    pub to: usize,
}

/// Metric refinement recorded as metadata; never verified here.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearlyStraight {
    pub epsilon: f64,
    pub k: f64,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainTrack {
    pub genus: usize,
    pub switches: usize,
    pub branches: Vec<Branch>,
    pub nearly_straight: Option<NearlyStraight>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarryingCertificate {
    pub weights: Vec<u64>,
    /// Train path (branch indices) used for each curve of the multiloop.
    pub paths: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Carrying {
    Carried(CarryingCertificate),
    NotCarried { curve: String },
}

impl TrainTrack {
    /// One handle track per genus: branches aᵢ, bᵢ from uᵢ to vᵢ and an
    /// unlabelled return branch xᵢ. Carries the positive words in aᵢ, bᵢ.
    pub fn standard(genus: usize) -> TrainTrack {
        let mut branches = Vec::new();
        for i in 1..=genus {
            let (u, v) = (2 * (i - 1), 2 * (i - 1) + 1);
            branches.push(Branch { name: format!("a{i}"), label: Word::letter(Letter::a(i)), from: u, to: v });
            branches.push(Branch { name: format!("b{i}"), label: Word::letter(Letter::b(i)), from: u, to: v });
            branches.push(Branch { name: format!("x{i}"), label: Word::empty(), from: v, to: u });
        }
        TrainTrack { genus, switches: 2 * genus, branches, nearly_straight: None }
    }

    /// Every switch has branches on both sides and total valence ≤ 3.
    pub fn is_trivalent(&self) -> bool {
        (0..self.switches).all(|s| {
            let out = self.branches.iter().filter(|b| b.from == s).count();
            let inc = self.branches.iter().filter(|b| b.to == s).count();
            out >= 1 && inc >= 1 && out + inc <= 3
        })
    }

    /// Integer switch conditions: incoming weight equals outgoing weight.
    pub fn switch_conditions_hold(&self, weights: &[u64]) -> bool {
        weights.len() == self.branches.len()
            && (0..self.switches).all(|s| {
                let out: u64 = self.branches.iter().zip(weights).filter(|(b, _)| b.from == s).map(|(_, w)| w).sum();
                let inc: u64 = self.branches.iter().zip(weights).filter(|(b, _)| b.to == s).map(|(_, w)| w).sum();
                out == inc
            })
    }

    fn trace(&self, word: &[Letter], pos: usize, switch: usize, start: usize, path: &mut Vec<usize>, budget: usize) -> bool {
        if pos == word.len() && switch == start && !path.is_empty() {
            return true;
        }
        if path.len() >= budget {
            return false;
        }
        for (i, b) in self.branches.iter().enumerate() {
            if b.from != switch {
                continue;
            }
            let l = b.label.letters();
            if word.len() - pos < l.len() || word[pos..pos + l.len()] != *l {
                continue;
            }
            path.push(i);
            if self.trace(word, pos + l.len(), b.to, start, path, budget) {
                return true;
            }
            path.pop();
        }
        false
    }

    /// Closed train path spelling some rotation of the word or its inverse.
    pub fn train_path(&self, c: &CurveClass) -> Option<Vec<usize>> {
        let budget = 2 * c.word().len() + self.branches.len();
        for w in [c.word().clone(), c.word().inverse()] {
            for r in 0..w.len() {
                let rot = w.rotate(r);
                for s in 0..self.switches {
                    let mut path = Vec::new();
                    if self.trace(rot.letters(), 0, s, s, &mut path, budget) {
                        return Some(path);
                    }
                }
            }
        }
        None
    }

    /// Branch weights realising the weighted multiloop, or the first curve
    /// with no train path.
    pub fn carries(&self, multiloop: &[(CurveClass, u64)]) -> Carrying {
        let mut weights = vec![0u64; self.branches.len()];
        let mut paths = Vec::new();
        for (c, w) in multiloop {
            let Some(p) = self.train_path(c) else {
                return Carrying::NotCarried { curve: c.to_string() };
            };
            for &b in &p {
                weights[b] += w;
            }
            paths.push(p);
        }
        debug_assert!(self.switch_conditions_hold(&weights));
        Carrying::Carried(CarryingCertificate { weights, paths })
    }
}

/// Branch weights by direct letter counting, independent of path search:
/// for a positive word in one handle, weight(aᵢ) and weight(bᵢ) are letter
/// counts and weight(xᵢ) is their sum.
pub fn standard_weights_by_counting(genus: usize, multiloop: &[(CurveClass, u64)]) -> Option<Vec<u64>> {
    let mut out = vec![0u64; 3 * genus];
    for (c, w) in multiloop {
        let word = if c.word().letters().iter().all(|l| !l.is_inverse()) { c.word().clone() } else { c.word().inverse() };
        if word.letters().iter().any(|l| l.is_inverse()) {
            return None;
        }
        for l in word.letters() {
            let h = l.generator() / 2;
            out[3 * h + l.generator() % 2] += w;
            out[3 * h + 2] += w;
        }
    }
    Some(out)
}
