use serde::{Deserialize, Serialize};

use super::slope::omega;
use super::{FareyError, Slope};
use crate::topology::{Letter, TwistCurve, Word};

/// Three pairwise Farey-adjacent slopes, stored sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[Slope; 3]", into = "[Slope; 3]")]
pub struct FareyTriangle {
    slopes: [Slope; 3],
}

impl TryFrom<[Slope; 3]> for FareyTriangle {
    type Error = FareyError;
    fn try_from(s: [Slope; 3]) -> Result<Self, FareyError> {
        FareyTriangle::new(s[0], s[1], s[2])
    }
}

impl From<FareyTriangle> for [Slope; 3] {
    fn from(t: FareyTriangle) -> Self {
        t.slopes
    }
}

impl FareyTriangle {
    pub fn new(a: Slope, b: Slope, c: Slope) -> Result<Self, FareyError> {
        if !(a.adjacent(&b) && b.adjacent(&c) && a.adjacent(&c)) {
            return Err(FareyError::NotFarey(format!("{{{a}, {b}, {c}}}")));
        }
        let mut slopes = [a, b, c];
        slopes.sort();
        Ok(FareyTriangle { slopes })
    }

    /// {0, 1, ∞}
    pub fn standard() -> Self {
        FareyTriangle::new(Slope::ZERO, Slope::int(1), Slope::INF).expect("literal")
    }

    pub fn slopes(&self) -> [Slope; 3] {
        self.slopes
    }

    pub fn contains(&self, s: &Slope) -> bool {
        self.slopes.contains(s)
    }

    fn third(&self, e: (Slope, Slope)) -> Result<Slope, FareyError> {
        if e.0 == e.1 || !self.contains(&e.0) || !self.contains(&e.1) {
            return Err(FareyError::NotAnEdge(format!("{{{}, {}}}", e.0, e.1)));
        }
        Ok(*self.slopes.iter().find(|s| **s != e.0 && **s != e.1).expect("three distinct slopes"))
    }

    /// The Farey neighbour across `edge`: the third vertex r is replaced by
    /// the other mediant u ∓ v.
    pub fn diagonal_exchange(&self, edge: (Slope, Slope)) -> Result<FareyTriangle, FareyError> {
        let r = self.third(edge)?;
        let (u, v) = (edge.0.vector(), edge.1.vector());
        let plus = Slope::from_vector((u.0 + v.0, u.1 + v.1))?;
        let minus = Slope::from_vector((u.0 - v.0, u.1 - v.1))?;
        let new = if plus == r { minus } else { plus };
        FareyTriangle::new(edge.0, edge.1, new)
    }

    /// Edge shared with an adjacent triangle.
    pub fn shared_edge(&self, o: &FareyTriangle) -> Option<(Slope, Slope)> {
        let common: Vec<Slope> = self.slopes.iter().copied().filter(|s| o.contains(s)).collect();
        (common.len() == 2).then(|| (common[0], common[1]))
    }

    pub fn map(&self, f: impl Fn(Slope) -> Slope) -> Result<FareyTriangle, FareyError> {
        FareyTriangle::new(f(self.slopes[0]), f(self.slopes[1]), f(self.slopes[2]))
    }
}

/// Ideal triangulation of the once-punctured torus, by its edge slopes.
pub type IdealTriangulationT1 = FareyTriangle;

/// Tetrahedral triangulation of the four-punctured sphere, recorded by the
/// slopes of the three loops separating opposite edge pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IdealTriangulationS4 {
    pub loops: FareyTriangle,
}

impl IdealTriangulationS4 {
    /// Simultaneous exchange of the opposite edge pair disjoint from the
    /// loops of `keep`; the loop of the exchanged pair is replaced.
    pub fn exchange(&self, keep: (Slope, Slope)) -> Result<IdealTriangulationS4, FareyError> {
        Ok(IdealTriangulationS4 { loops: self.loops.diagonal_exchange(keep)? })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FareyCase {
    /// once-holed torus: a left twist is one exchange
    Torus,
    /// four-holed sphere: a left twist is two simultaneous exchanges
    Sphere,
}

impl FareyCase {
    pub fn steps_per_twist(self) -> usize {
        match self {
            FareyCase::Torus => 1,
            FareyCase::Sphere => 2,
        }
    }
}

/// One step along the fan of triangles around m in the left-twist
/// direction: v ↦ v + ω(m, v)·m.
pub fn fan_step(m: &Slope, s: &Slope) -> Slope {
    let (mv, v) = (m.vector(), s.vector());
    let w = omega(mv, v);
    Slope::from_vector((v.0 + w * mv.0, v.1 + w * mv.1)).expect("unimodular image")
}

/// Integer action of the n-th left twist along m on slopes.
pub fn twist_slope(case: FareyCase, m: &Slope, s: &Slope, n: u32) -> Slope {
    (0..n as usize * case.steps_per_twist()).fold(*s, |acc, _| fan_step(m, &acc))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub edge: (Slope, Slope),
    pub from: FareyTriangle,
    pub to: FareyTriangle,
}

/// The exchanges realising the `power`-th left twist along m ∈ t.
pub fn twist_as_exchanges(t: &FareyTriangle, m: &Slope, power: i64, case: FareyCase) -> Result<Vec<Exchange>, FareyError> {
    if power < 0 {
        return Err(FareyError::LeftTwistsOnly);
    }
    if !t.contains(m) {
        return Err(FareyError::NotAnEdge(m.to_string()));
    }
    let mut out = Vec::new();
    let mut cur = *t;
    for _ in 0..power as usize * case.steps_per_twist() {
        let next = cur.map(|s| fan_step(m, &s))?;
        let edge = cur.shared_edge(&next).ok_or_else(|| FareyError::NotFarey("fan step not adjacent".into()))?;
        let exchanged = cur.diagonal_exchange(edge)?;
        debug_assert_eq!(exchanged, next);
        out.push(Exchange { edge, from: cur, to: exchanged });
        cur = exchanged;
    }
    Ok(out)
}

/// Operator on slope vectors: (0,1) is a, (1,0) is b.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Gen {
    TwistA(i64),
    TwistB(i64),
}

fn act(g: Gen, v: (i64, i64)) -> (i64, i64) {
    match g {
        Gen::TwistA(n) => (v.0, v.1 + n * v.0),
        Gen::TwistB(n) => (v.0 - n * v.1, v.1),
    }
}

fn norm(u: (i64, i64), v: (i64, i64)) -> i64 {
    u.0.abs() + u.1.abs() + v.0.abs() + v.1.abs()
}

/// Words (g, h) in handle `handle` with homology classes u, v, produced by
/// twist automorphisms from (aᵢ, bᵢ); they satisfy [g, h] = [aᵢ, bᵢ]
/// exactly. Requires ω(u, v) = 1.
pub fn basis_words(u: &Slope, v: &Slope, handle: usize) -> Result<(Word, Word), FareyError> {
    let (mut x, mut y) = (u.vector(), v.vector());
    if omega(x, y) == -1 {
        y = (-y.0, -y.1);
    }
    if omega(x, y) != 1 {
        return Err(FareyError::NotFarey(format!("{u}, {v}")));
    }
    // descend to ±(a, b), recording the inverse moves
    let mut moves: Vec<Gen> = Vec::new();
    while norm(x, y) > 2 {
        let best = [Gen::TwistA(1), Gen::TwistA(-1), Gen::TwistB(1), Gen::TwistB(-1)]
            .into_iter()
            .map(|g| (norm(act(g, x), act(g, y)), g))
            .min_by_key(|(n, _)| *n)
            .expect("four candidates");
        if best.0 >= norm(x, y) {
            return Err(FareyError::NotFarey("descent stalled".into()));
        }
        x = act(best.1, x);
        y = act(best.1, y);
        moves.push(best.1);
    }
    let (a, b) = (Letter::a(handle), Letter::b(handle));
    let genus = handle.max(2);
    let auto = |t: TwistCurve, n: i64| t.automorphism(genus, n);
    let vec_of = |word: &Word| {
        let h = word.homology(genus);
        (h[2 * handle - 1], h[2 * handle - 2])
    };
    // the descent ends at a quarter-turn image of (a, b); T_a T_b T_a is a quarter turn
    let (mut g, mut h) = (Word::letter(a), Word::letter(b));
    let (ta, tb) = (auto(TwistCurve::A(handle), 1), auto(TwistCurve::B(handle), 1));
    let mut turns = 0;
    while (vec_of(&g), vec_of(&h)) != (x, y) {
        if turns == 4 {
            return Err(FareyError::NotFarey("descent ended off basis".into()));
        }
        g = g.substitute(&ta).substitute(&tb).substitute(&ta);
        h = h.substitute(&ta).substitute(&tb).substitute(&ta);
        turns += 1;
    }
    for m in moves.iter().rev() {
        // undo: apply the inverse of the recorded descent move
        let img = match *m {
            Gen::TwistA(n) => auto(TwistCurve::A(handle), -n),
            Gen::TwistB(n) => auto(TwistCurve::B(handle), -n),
        };
        g = g.substitute(&img);
        h = h.substitute(&img);
    }
    Ok((g, h))
}

/// A word representing the slope s in handle `handle`.
pub fn slope_word(s: &Slope, handle: usize) -> Word {
    // any Farey neighbour completes s to a positive basis
    let (p, q) = s.vector();
    let (mut x, mut y) = (0i64, 0i64);
    // solve q·x − p·y = 1 by extended Euclid
    fn ext(a: i64, b: i64) -> (i64, i64, i64) {
        if b == 0 { (a, 1, 0) } else {
            let (g, x, y) = ext(b, a % b);
            (g, y, x - (a / b) * y)
        }
    }
    let (g, s1, t1) = ext(q, p);
    if g.abs() == 1 {
        x = s1 * g;
        y = -t1 * g;
    }
    let nb = Slope::from_vector((x, y)).expect("unimodular");
    basis_words(s, &nb, handle).expect("adjacent by construction").0
}
