use serde::{Deserialize, Serialize};

use super::{HolonomyError, HolonomyRep};
use crate::geometry::{CPoint, FixedPoints, MobiusKind, MobiusMap};
use crate::topology::{CurveClass, Letter};
use crate::{Mobius, Point};



pub const DEFAULT_BALL: usize = 2;
// Long conjugators reproduce a crossing only to about 1e-5.
const POS_TOL: f64 = 1e-5;
const COS_TOL: f64 = 1e-4;
const END_TOL: f64 = 1e-9;
const PARALLEL_TOL: f64 = 1e-9;

/// One transverse crossing of the closed geodesics, located on axis(c1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Position along the fundamental segment of axis(c1), in [0, ℓ(c1)).
    pub position: f64,
    /// Cosine of the oriented angle from axis(c1) to the translate of axis(c2).
    pub signed_cos: f64,
}

impl Crossing {
    pub fn angle(&self) -> f64 {
        self.signed_cos.abs().min(1.0).acos()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub count: usize,
    pub crossings: Vec<Crossing>,
    /// Some translate of axis(c2) equals axis(c1).
    pub parallel: bool,
    pub ball: usize,
    /// Counts at ball and ball + 1 agree.
    pub stable: bool,
}

impl CrossingReport {
    pub fn max_angle(&self) -> f64 {
        self.crossings.iter().map(|c| c.angle()).fold(0.0, f64::max)
    }
}

struct Axis {
    att: Point,
    rep: Point,
    length: f64,
}

fn axis(rep: &HolonomyRep, c: &CurveClass) -> Result<Axis, HolonomyError> {
    let m = rep.curve(c);
    if m.classify().kind != MobiusKind::Loxodromic {
        return Err(HolonomyError::NotLoxodromic(c.to_string()));
    }
    let FixedPoints::Two(att, r) = m.fixed_points()? else {
        return Err(HolonomyError::NotLoxodromic(c.to_string()));
    };
    Ok(Axis { att, rep: r, length: m.translation_length()? })
}

fn near_zero_or_inf(p: &Point) -> bool {
    p.chordal(&CPoint::Infinity) < END_TOL || p.chordal(&CPoint::real(0.0)) < END_TOL
}

/// Crossings of the closed geodesics of c1 and c2 found among translates
/// g·axis(c2), g = P·h·Q⁻¹ with P, Q prefixes of c1, c2 and |h| ≤ ball.
fn raw_crossings(rep: &HolonomyRep, c1: &CurveClass, c2: &CurveClass, ball: usize) -> Result<(Vec<Crossing>, bool), HolonomyError> {
    let base = rep.fuchsian_base()?;
    let rep = &base;
    let ax1 = axis(rep, c1)?;
    axis(rep, c2)?;
    let chart: Mobius = MobiusMap::normalizer(&ax1.rep, &ax1.att)?.inverse();
    let prefixes1: Vec<Mobius> = (0..c1.word().len()).map(|k| chart * rep.eval(&c1.word().prefix(k))).collect();
    let letters = Letter::all(rep.genus());
    let mut found: Vec<Crossing> = Vec::new();
    let mut parallel = false;
    let w2 = c2.word();
    for m in 0..w2.len() {
        // Q⁻¹ c2 Q is a rotation of c2
        let rotated = rep.eval(&w2.rotate(m));
        // depth-first over reduced h, growing h on the left
        let mut stack: Vec<(Option<Letter>, usize, Mobius)> = vec![(None, 0, Mobius::identity())];
        while let Some((first, depth, h)) = stack.pop() {
            for p in &prefixes1 {
                let g = *p * h;
                let conj = (g * rotated * g.inverse()).renormalized();
                let Ok(FixedPoints::Two(att, rp)) = conj.fixed_points() else { continue };
                let (zu, zv) = (near_zero_or_inf(&rp), near_zero_or_inf(&att));
                if zu && zv {
                    parallel = true;
                    continue;
                }
                if zu || zv {
                    continue;
                }
                let (u, v) = (rp.finite().unwrap().re, att.finite().unwrap().re);
                if u * v >= 0.0 {
                    continue;
                }
                let cos = (u + v) / (v - u);
                // axis(c1) itself, seen through rounding
                if 1.0 - cos.abs() < PARALLEL_TOL {
                    parallel = true;
                    continue;
                }
                let pos = (-u * v).sqrt().ln().rem_euclid(ax1.length);
                found.push(Crossing { position: pos, signed_cos: cos });
            }
            if depth < ball {
                for &l in &letters {
                    if Some(l.inv()) == first {
                        continue;
                    }
                    stack.push((Some(l), depth + 1, (*rep.letter(l) * h).renormalized()));
                }
            }
        }
    }
    Ok((dedupe(found, ax1.length), parallel))
}

fn dedupe(mut v: Vec<Crossing>, period: f64) -> Vec<Crossing> {
    v.sort_by(|a, b| a.position.total_cmp(&b.position).then(a.signed_cos.total_cmp(&b.signed_cos)));
    let mut out: Vec<Crossing> = Vec::new();
    for c in v {
        let dup = out.iter().any(|o| {
            let dp = (o.position - c.position).abs();
            let dp = dp.min(period - dp);
            dp < POS_TOL * (1.0 + period) && (o.signed_cos - c.signed_cos).abs() < COS_TOL
        });
        if !dup {
            out.push(c);
        }
    }
    out
}

/// Transverse crossings of the closed geodesics of c1 and c2 under the
/// Fuchsian representation (or the Fuchsian base of a bent one). For
/// c1 = c2 each self-intersection point is counted twice.
pub fn intersection_count(rep: &HolonomyRep, c1: &CurveClass, c2: &CurveClass, ball: usize) -> Result<CrossingReport, HolonomyError> {
    let (small, _) = raw_crossings(rep, c1, c2, ball)?;
    let (big, parallel) = raw_crossings(rep, c1, c2, ball + 1)?;
    Ok(CrossingReport { count: big.len(), stable: small.len() == big.len(), crossings: big, parallel, ball })
}

/// Crossing count, raising the ball until two successive balls agree.
pub fn stable_intersection(rep: &HolonomyRep, c1: &CurveClass, c2: &CurveClass, ball: usize, max_ball: usize) -> Result<CrossingReport, HolonomyError> {
    let mut b = ball;
    loop {
        let r = intersection_count(rep, c1, c2, b)?;
        if r.stable || b >= max_ball {
            return Ok(r);
        }
        b += 1;
    }
}

/// Self-intersection points of the closed geodesic of c.
pub fn self_intersections(rep: &HolonomyRep, c: &CurveClass, ball: usize) -> Result<(usize, bool), HolonomyError> {
    let r = intersection_count(rep, c, c, ball)?;
    Ok((r.count / 2, r.stable))
}

pub fn is_simple(rep: &HolonomyRep, c: &CurveClass, ball: usize) -> Result<bool, HolonomyError> {
    Ok(self_intersections(rep, c, ball)?.0 == 0)
}

/// Crossings found at a single ball, without the stability check. Any
/// crossing found is genuine, so a positive count is a lower bound.
pub fn crossings_at_ball(rep: &HolonomyRep, c1: &CurveClass, c2: &CurveClass, ball: usize) -> Result<(usize, bool), HolonomyError> {
    let (v, parallel) = raw_crossings(rep, c1, c2, ball)?;
    Ok((v.len(), parallel))
}

/// Primitive words whose geodesics coincide (as unoriented curves).
pub fn is_parallel(rep: &HolonomyRep, c1: &CurveClass, c2: &CurveClass, ball: usize) -> Result<bool, HolonomyError> {
    let base = rep.fuchsian_base()?;
    let (l1, l2) = (base.geodesic_length(c1)?, base.geodesic_length(c2)?);
    if (l1 - l2).abs() > 1e-7 * (1.0 + l1) {
        return Ok(false);
    }
    Ok(raw_crossings(&base, c1, c2, ball)?.1)
}
