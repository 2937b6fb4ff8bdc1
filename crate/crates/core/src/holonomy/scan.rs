use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::HolonomyRep;
use crate::geometry::{CPoint, FixedPoints, MobiusKind};
use crate::topology::Word;
use crate::{Mobius, Point, C64};

pub const ENDPOINT_GAP: f64 = 1e-6;
pub const COMMUTATOR_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordViolation {
    pub word: Word,
    pub kind: MobiusKind,
    pub tr_sq: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointViolation {
    pub first: Word,
    pub second: Word,
    pub gap: f64,
    /// tr[A, B]; equals 2 when the two maps share a fixed point.
    pub commutator_trace: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoxodromicityReport {
    pub radius: usize,
    pub words_classified: usize,
    pub words_checked_for_endpoints: usize,
    pub borderline: usize,
    pub violations: Vec<WordViolation>,
    pub endpoint_violations: Vec<EndpointViolation>,
    /// Pairs of non-coaxial axes with endpoints closer than 1e-6 whose
    /// commutator trace rules out a shared fixed point.
    pub near_misses: usize,
    /// Closest endpoint pair among the near misses.
    pub min_endpoint_gap: Option<f64>,
    /// Smallest |tr[A, B] − 2| over the near misses.
    pub min_commutator_margin: Option<f64>,
    pub certified: bool,
}

fn sphere(p: &Point) -> [f64; 3] {
    match p {
        CPoint::Infinity => [0.0, 0.0, 1.0],
        CPoint::Finite(z) => {
            let n = 1.0 + z.norm_sqr();
            [2.0 * z.re / n, 2.0 * z.im / n, (z.norm_sqr() - 1.0) / n]
        }
    }
}

/// tr[A, B], which does not depend on the signs of A and B.
pub fn commutator_trace(a: &Mobius, b: &Mobius) -> C64 {
    let (x, y) = (a.entries(), b.entries());
    let ai = a.inverse().entries();
    let bi = b.inverse().entries();
    let mul = |p: [C64; 4], q: [C64; 4]| {
        [p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3], p[2] * q[0] + p[3] * q[2], p[2] * q[1] + p[3] * q[3]]
    };
    let m = mul(mul(mul(x, y), ai), bi);
    m[0] + m[3]
}

/// tr[A, B] for loxodromic A, computed in the frame where A is diagonal:
/// with B = [[p, q], [r, s]] there, tr[A, B] = 2 − qr(λ − 1/λ)². This keeps
/// relative accuracy when the entries are large.
pub fn commutator_trace_stable(a: &Mobius, b: &Mobius) -> Option<C64> {
    let FixedPoints::Two(att, rep) = a.fixed_points().ok()? else { return None };
    let (ninv, k2) = diagonal_frame(a, &att, &rep)?;
    let bb = b.conjugate_by(&ninv);
    Some(C64::new(2.0, 0.0) - bb.b() * bb.c() * k2)
}

fn diagonal_frame(a: &Mobius, att: &Point, rep: &Point) -> Option<(Mobius, C64)> {
    let n = crate::geometry::MobiusMap::normalizer(rep, att).ok()?;
    let lam = (a.complex_length().ok()? * 0.5).exp();
    let k = lam - lam.inv();
    Some((n.inverse(), k * k))
}

/// Points of `items` closer than `radius` in the chordal metric, found by
/// hashing into cells of that size.
fn near_pairs(points: &[(usize, Point)], radius: f64) -> Vec<(usize, usize, f64)> {
    let key = |v: [f64; 3]| [(v[0] / radius).floor() as i64, (v[1] / radius).floor() as i64, (v[2] / radius).floor() as i64];
    let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let coords: Vec<[f64; 3]> = points.iter().map(|(_, p)| sphere(p)).collect();
    for (i, v) in coords.iter().enumerate() {
        cells.entry(key(*v)).or_default().push(i);
    }
    let mut out = Vec::new();
    for (i, v) in coords.iter().enumerate() {
        let k = key(*v);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = cells.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        for &j in list {
                            if j > i && points[i].0 != points[j].0 {
                                let d = points[i].1.chordal(&points[j].1);
                                if d < radius {
                                    out.push((i, j, d));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    out
}

/// Finite-radius purely-loxodromic certificate. Classifies every cyclically
/// reduced word of length ≤ radius and checks that axes of non-commuting
/// words of length ≤ radius share no endpoint.
pub fn purely_loxodromic_scan(rep: &HolonomyRep, radius: usize) -> LoxodromicityReport {
    let radius = radius.max(1);
    let words = Word::ball(rep.genus(), radius);
    let mut violations = Vec::new();
    let mut classified = 0;
    let mut borderline = 0;
    let mut axes: Vec<(Word, Mobius, Point, Point)> = Vec::new();
    // per axis: the chart making it diagonal and (λ − 1/λ)²
    let mut frames: Vec<Option<(Mobius, C64)>> = Vec::new();
    for w in words.iter().skip(1) {
        let m = rep.eval(w);
        let cls = m.classify();
        if w.is_cyclically_reduced() {
            classified += 1;
            borderline += cls.borderline as usize;
            if cls.kind != MobiusKind::Loxodromic {
                violations.push(WordViolation { word: w.clone(), kind: cls.kind, tr_sq: [cls.tr_sq.re, cls.tr_sq.im] });
            }
        }
        if cls.kind == MobiusKind::Loxodromic {
            if let Ok(FixedPoints::Two(a, r)) = m.fixed_points() {
                axes.push((w.clone(), m, a, r));
                frames.push(diagonal_frame(&m, &a, &r));
            }
        }
    }
    let points: Vec<(usize, Point)> = axes.iter().enumerate().flat_map(|(i, (_, _, a, r))| [(i, *a), (i, *r)]).collect();
    let coaxial = |i: usize, j: usize| {
        let (a1, r1) = (axes[i].2, axes[i].3);
        let (a2, r2) = (axes[j].2, axes[j].3);
        let same = a1.chordal(&a2) < ENDPOINT_GAP && r1.chordal(&r2) < ENDPOINT_GAP;
        let swapped = a1.chordal(&r2) < ENDPOINT_GAP && r1.chordal(&a2) < ENDPOINT_GAP;
        same || swapped
    };
    let mut endpoint_violations = Vec::new();
    let mut near_misses = 0;
    let mut min_gap: Option<f64> = None;
    let mut min_margin: Option<f64> = None;
    for (pi, pj, d) in near_pairs(&points, ENDPOINT_GAP) {
        let (i, j) = (points[pi].0, points[pj].0);
        if coaxial(i, j) {
            continue;
        }
        let (a, b) = (&axes[i].1, &axes[j].1);
        let t = match &frames[i] {
            Some((ninv, k2)) => {
                let bb = b.conjugate_by(ninv);
                C64::new(2.0, 0.0) - bb.b() * bb.c() * k2
            }
            None => commutator_trace(a, b),
        };
        let margin = (t - C64::new(2.0, 0.0)).norm();
        if margin <= COMMUTATOR_TOL {
            endpoint_violations.push(EndpointViolation {
                first: axes[i].0.clone(),
                second: axes[j].0.clone(),
                gap: d,
                commutator_trace: [t.re, t.im],
            });
        } else {
            near_misses += 1;
            min_gap = Some(min_gap.map_or(d, |g: f64| g.min(d)));
            min_margin = Some(min_margin.map_or(margin, |g: f64| g.min(margin)));
        }
    }
    let certified = violations.is_empty() && endpoint_violations.is_empty();
    LoxodromicityReport {
        radius,
        words_classified: classified,
        words_checked_for_endpoints: axes.len(),
        borderline,
        violations,
        endpoint_violations,
        near_misses,
        min_endpoint_gap: min_gap,
        min_commutator_margin: min_margin,
        certified,
    }
}
