use serde::{Deserialize, Serialize};

use super::{FnOrigin, HolonomyError, HolonomyRep};
use crate::geometry::{FixedPoints, MobiusMap};
use crate::topology::{w, CurveClass};
use crate::{Mobius, C64};

pub const STANDARD_G2: &str = "g2-standard";

/// Fenchel–Nielsen coordinates relative to the reference decomposition
/// {a1, a2, s} with s = a1 b1 A1 B1. Twists are in length units: a twist
/// equal to the cuff length is one full Dehn twist.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FnCoordinates {
    pub decomposition: String,
    pub lengths: Vec<f64>,
    pub twists: Vec<f64>,
}

impl FnCoordinates {
    pub fn genus2(lengths: [f64; 3], twists: [f64; 3]) -> Self {
        FnCoordinates { decomposition: STANDARD_G2.into(), lengths: lengths.to_vec(), twists: twists.to_vec() }
    }

    pub fn genus(&self) -> usize {
        self.lengths.len() / 3 + 1
    }

    pub fn validate(&self) -> Result<(), HolonomyError> {
        if self.decomposition != STANDARD_G2 || self.lengths.len() != 3 || self.twists.len() != 3 {
            return Err(HolonomyError::Shape(format!(
                "only the genus-2 reference decomposition {STANDARD_G2:?} with 3 lengths and 3 twists is supported"
            )));
        }
        if !self.lengths.iter().all(|l| l.is_finite() && *l > 0.0) || !self.twists.iter().all(|t| t.is_finite()) {
            return Err(HolonomyError::Shape("lengths must be positive and finite".into()));
        }
        Ok(())
    }
}

/// The reference pants curves in FN order.
pub fn reference_curves() -> [CurveClass; 3] {
    let c = |s: &str| CurveClass::new(w(s), 2).expect("literal");
    [c("a1"), c("a2"), c("a1 b1 A1 B1")]
}

fn degenerate(fnc: &FnCoordinates) -> HolonomyError {
    HolonomyError::DegenerateHexagon(fnc.lengths.clone())
}

/// One-holed torus with cuff length `l`, boundary length `big_l` and
/// complex twist `t`: A = diag(λ, 1/λ), B = [[p, κ], [κ, p]]·T_t.
fn torus(l: f64, big_l: f64, t: C64) -> Result<(Mobius, Mobius), HolonomyError> {
    let kappa = (big_l / 4.0).cosh() / (l / 2.0).sinh();
    let p = (1.0 + kappa * kappa).sqrt();
    if !kappa.is_finite() || !p.is_finite() || kappa > 1e12 || l > 200.0 {
        return Err(HolonomyError::Shape("hexagon".into()));
    }
    let a = Mobius::dilation(C64::new(l, 0.0));
    let b0 = Mobius::from_real(p, kappa, kappa, p)?;
    Ok((a, b0 * Mobius::dilation(t)))
}

/// Chart taking 0, ∞ to the repelling and attracting points of `k`, scaled so
/// that the axis of `a` has endpoints with product 1.
fn cuff_chart(k: &Mobius, a: &Mobius) -> Result<Mobius, HolonomyError> {
    let FixedPoints::Two(att, rep) = k.fixed_points()? else {
        return Err(HolonomyError::NotLoxodromic("boundary".into()));
    };
    let m0 = MobiusMap::normalizer(&rep, &att)?;
    let FixedPoints::Two(p, q) = a.fixed_points()? else {
        return Err(HolonomyError::NotLoxodromic("cuff".into()));
    };
    let inv = m0.inverse();
    let (u, v) = match (inv.apply(&p).finite(), inv.apply(&q).finite()) {
        (Some(u), Some(v)) => (u, v),
        _ => return Err(HolonomyError::Shape("cuff axis meets boundary axis".into())),
    };
    let sigma = (u * v).sqrt();
    if !(sigma.norm() > 1e-300) {
        return Err(HolonomyError::Shape("cuff axis meets boundary axis".into()));
    }
    Ok(m0 * Mobius::diag(sigma.sqrt()))
}

fn assemble(fnc: &FnCoordinates, bends: &[f64]) -> Result<HolonomyRep, HolonomyError> {
    fnc.validate()?;
    if bends.len() != 3 || !bends.iter().all(|b| b.is_finite()) {
        return Err(HolonomyError::Shape("expected 3 bending angles".into()));
    }
    let (l1, l2, ls) = (fnc.lengths[0], fnc.lengths[1], fnc.lengths[2]);
    let t = |k: usize| C64::new(fnc.twists[k], bends[k]);
    let (a1, b1) = torus(l1, ls, t(0)).map_err(|_| degenerate(fnc))?;
    let (a2, b2) = torus(l2, ls, t(1)).map_err(|_| degenerate(fnc))?;
    let k1 = a1 * b1 * a1.inverse() * b1.inverse();
    let k2 = a2 * b2 * a2.inverse() * b2.inverse();
    let m1 = cuff_chart(&k1.inverse(), &a1).map_err(|_| degenerate(fnc))?;
    let m2 = cuff_chart(&k2, &a2).map_err(|_| degenerate(fnc))?;
    let g = m1 * Mobius::dilation(-t(2)) * m2.inverse();
    let gens = vec![a1, b1, a2.conjugate_by(&g), b2.conjugate_by(&g)];
    let gens = if bends.iter().all(|b| *b == 0.0) {
        gens.into_iter().map(realify).collect::<Result<Vec<_>, _>>()?
    } else {
        gens
    };
    let rep = HolonomyRep::new(2, gens).map_err(|e| match e {
        HolonomyError::Relator(_) => degenerate(fnc),
        other => other,
    })?;
    Ok(rep.with_origin(FnOrigin { coords: fnc.clone(), bends: bends.to_vec() }))
}

// Drop rounding-level imaginary parts of a real construction.
fn realify(m: Mobius) -> Result<Mobius, HolonomyError> {
    let e = m.entries();
    if e.iter().any(|z| z.im.abs() > 1e-9 * (1.0 + z.re.abs())) {
        return Err(HolonomyError::Shape("non-real gluing".into()));
    }
    Ok(MobiusMap::from_real(e[0].re, e[1].re, e[2].re, e[3].re)?)
}

/// Fuchsian representation with the given FN coordinates (genus 2).
pub fn build_from_fn(fnc: &FnCoordinates) -> Result<HolonomyRep, HolonomyError> {
    assemble(fnc, &[0.0; 3])
}

/// Quasi-Fuchsian deformation: each twist gets imaginary part `bends[k]`,
/// i.e. the surface is bent by that angle along the k-th reference curve.
pub fn build_bent(fnc: &FnCoordinates, bends: &[f64]) -> Result<HolonomyRep, HolonomyError> {
    assemble(fnc, bends)
}
