use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{FnCoordinates, HolonomyError};
use crate::geometry::MobiusKind;
use crate::topology::{CurveClass, Letter, SurfacePresentation, Word};
use crate::{Mobius, Point, C64};

pub const RELATOR_TOL: f64 = 1e-8;

/// Images of the surface generators a₁, b₁, …, a_g, b_g.
#[derive(Clone, Debug)]
pub struct HolonomyRep {
    genus: usize,
    gens: Vec<Mobius>,
    // generator k at 2k, its inverse at 2k + 1
    table: Vec<Mobius>,
    fuchsian: bool,
    lifts_to_sl2: bool,
    relator_residual: f64,
    origin: Option<FnOrigin>,
}

/// FN data a representation was built from, kept so that bent
/// representations can recover their Fuchsian base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FnOrigin {
    pub coords: FnCoordinates,
    pub bends: Vec<f64>,
}

fn raw_mul(x: [C64; 4], y: [C64; 4]) -> [C64; 4] {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

impl HolonomyRep {
    /// Validated surface-group representation.
    pub fn new(genus: usize, gens: Vec<Mobius>) -> Result<Self, HolonomyError> {
        let rep = Self::unchecked(genus, gens)?;
        if rep.relator_residual > RELATOR_TOL {
            return Err(HolonomyError::Relator(rep.relator_residual));
        }
        Ok(rep)
    }

    /// Any assignment of generator images; the relator residual is recorded
    /// but not enforced. Used for artificial test representations.
    pub fn unchecked(genus: usize, gens: Vec<Mobius>) -> Result<Self, HolonomyError> {
        if genus == 0 || gens.len() != 2 * genus {
            return Err(HolonomyError::Shape(format!("expected {} generators, got {}", 2 * genus, gens.len())));
        }
        let table = gens.iter().flat_map(|g| [*g, g.inverse()]).collect();
        let fuchsian = gens.iter().all(|g| g.is_real(1e-12));
        // The relator's SL(2) lift is independent of the sign chosen per generator.
        let mut prod = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        for i in 0..genus {
            let (a, b) = (gens[2 * i], gens[2 * i + 1]);
            for m in [a, b, a.inverse(), b.inverse()] {
                prod = raw_mul(prod, m.entries());
            }
        }
        let id = [1.0, 0.0, 0.0, 1.0];
        let dist = |s: f64| (0..4).map(|i| (prod[i] - C64::new(s * id[i], 0.0)).norm()).fold(0.0, f64::max);
        let (plus, minus) = (dist(1.0), dist(-1.0));
        Ok(HolonomyRep {
            genus,
            gens,
            table,
            fuchsian,
            lifts_to_sl2: plus <= minus,
            relator_residual: plus.min(minus),
            origin: None,
        })
    }

    pub(crate) fn with_origin(mut self, origin: FnOrigin) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn presentation(&self) -> SurfacePresentation {
        SurfacePresentation { genus: self.genus }
    }

    pub fn generators(&self) -> &[Mobius] {
        &self.gens
    }

    pub fn is_fuchsian(&self) -> bool {
        self.fuchsian
    }

    pub fn lifts_to_sl2(&self) -> bool {
        self.lifts_to_sl2
    }

    pub fn relator_residual(&self) -> f64 {
        self.relator_residual
    }

    pub fn origin(&self) -> Option<&FnOrigin> {
        self.origin.as_ref()
    }

    pub fn letter(&self, l: Letter) -> &Mobius {
        &self.table[l.slot()]
    }

    pub fn eval(&self, w: &Word) -> Mobius {
        let mut m = Mobius::identity();
        for (i, l) in w.letters().iter().enumerate() {
            m = m * *self.letter(*l);
            if i % 16 == 15 {
                m = m.renormalized();
            }
        }
        m
    }

    /// ρ(w)·p, applying letters right to left.
    pub fn apply(&self, w: &Word, p: &Point) -> Point {
        w.letters().iter().rev().fold(*p, |q, l| self.letter(*l).apply(&q))
    }

    pub fn curve(&self, c: &CurveClass) -> Mobius {
        self.eval(c.word())
    }

    /// Translation length of ρ(c).
    pub fn geodesic_length(&self, c: &CurveClass) -> Result<f64, HolonomyError> {
        let m = self.curve(c);
        if m.classify().kind != MobiusKind::Loxodromic {
            return Err(HolonomyError::NotLoxodromic(c.to_string()));
        }
        Ok(m.translation_length()?)
    }

    pub fn conjugated(&self, g: &Mobius) -> HolonomyRep {
        let gens = self.gens.iter().map(|m| m.conjugate_by(g)).collect();
        let mut r = Self::unchecked(self.genus, gens).expect("same shape");
        r.origin = self.origin.clone();
        r
    }

    /// The Fuchsian representation whose hyperbolic plane serves as the
    /// domain chart: the representation itself, or the unbent FN base.
    pub fn fuchsian_base(&self) -> Result<HolonomyRep, HolonomyError> {
        if self.fuchsian {
            return Ok(self.clone());
        }
        match &self.origin {
            Some(o) => super::build_from_fn(&o.coords),
            None => Err(HolonomyError::NotFuchsian),
        }
    }

    pub fn fixed_point(&self, w: &Word, sel: crate::geometry::Selector) -> Result<Point, HolonomyError> {
        Ok(self.eval(w).fixed_point(sel)?)
    }
}

fn generator_name(k: usize) -> String {
    Letter(k as i8 + 1).to_string()
}

#[derive(Serialize, Deserialize)]
struct RepJson {
    genus: usize,
    generators: BTreeMap<String, Mobius>,
    fuchsian: bool,
    lifts_to_sl2: bool,
    relator_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<FnOrigin>,
}

impl Serialize for HolonomyRep {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RepJson {
            genus: self.genus,
            generators: self.gens.iter().enumerate().map(|(k, m)| (generator_name(k), *m)).collect(),
            fuchsian: self.fuchsian,
            lifts_to_sl2: self.lifts_to_sl2,
            relator_residual: self.relator_residual,
            origin: self.origin.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HolonomyRep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = RepJson::deserialize(d)?;
        let mut gens = Vec::new();
        for k in 0..2 * j.genus {
            let name = generator_name(k);
            gens.push(*j.generators.get(&name).ok_or_else(|| serde::de::Error::custom(format!("missing generator {name}")))?);
        }
        let mut r = HolonomyRep::unchecked(j.genus, gens).map_err(serde::de::Error::custom)?;
        r.origin = j.origin;
        Ok(r)
    }
}
