use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{fan_step, FareyCase, FareyError, FareyTriangle, Slope};

/// Data for the sequence connecting the laminations of two adjacent pants
/// decompositions inside the subsurface F where they differ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaminationSeqSpec {
    pub index: usize,
    pub case: FareyCase,
    /// Handle index (torus case) or a label for the four-holed sphere.
    pub subsurface: String,
    /// Slope of mᵢ (the j → −∞ end).
    pub start: Slope,
    /// Slope of mᵢ₊₁ (the j → +∞ end).
    pub end: Slope,
    /// Description of the lamination outside F, spiralling to the left
    /// towards ∂F.
    pub exterior: String,
}

/// Spiralling direction towards boundary curves, fixed once for the crate.
pub const SPIRAL: &str = "left";

impl LaminationSeqSpec {
    pub fn torus(handle: usize, start: Slope, end: Slope) -> Self {
        LaminationSeqSpec {
            index: 0,
            case: FareyCase::Torus,
            subsurface: format!("handle {handle}"),
            start,
            end,
            exterior: format!("{SPIRAL}-spiralling, unchanged outside F"),
        }
    }

    pub fn swapped(&self) -> Self {
        LaminationSeqSpec { start: self.end, end: self.start, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), FareyError> {
        if self.start == self.end {
            return Err(FareyError::EqualEnds);
        }
        if !self.start.adjacent(&self.end) {
            return Err(FareyError::NotFarey(format!("ends {} and {} are not adjacent", self.start, self.end)));
        }
        Ok(())
    }

    /// The triangle containing both ends with third vertex the mediant of
    /// the normalised end vectors. In the sphere case this is the least of
    /// the two admissible pivots under vector order.
    pub fn pivot(&self) -> Result<FareyTriangle, FareyError> {
        self.validate()?;
        let (u, v) = (self.start.vector(), self.end.vector());
        let plus = Slope::from_vector((u.0 + v.0, u.1 + v.1))?;
        let minus = Slope::from_vector((u.0 - v.0, u.1 - v.1))?;
        let third = match self.case {
            FareyCase::Torus => plus,
            FareyCase::Sphere => plus.min(minus),
        };
        FareyTriangle::new(self.start, self.end, third)
    }
}

/// Triangulations ν̂ⱼ for j in the inclusive range: the pivot at j = 0,
/// fan steps around the end slope for j > 0 and around the start slope
/// for j < 0. A left twist is `steps_per_twist` consecutive entries.
pub fn interpolation_path(spec: &LaminationSeqSpec, j_min: i64, j_max: i64) -> Result<BTreeMap<i64, FareyTriangle>, FareyError> {
    if j_min > j_max {
        return Err(FareyError::Range(j_min, j_max));
    }
    let pivot = spec.pivot()?;
    let mut out = BTreeMap::new();
    let mut walk = |m: Slope, range: Box<dyn Iterator<Item = i64>>| -> Result<(), FareyError> {
        let mut cur = pivot;
        let mut k = 0i64;
        for j in range {
            while k < j.abs() {
                cur = cur.map(|s| fan_step(&m, &s))?;
                k += 1;
            }
            out.insert(j, cur);
        }
        Ok(())
    };
    if j_max >= 0 {
        walk(spec.end, Box::new(j_min.max(0)..=j_max))?;
    }
    if j_min < 0 {
        walk(spec.start, Box::new((j_min..=j_max.min(-1)).rev()))?;
    }
    Ok(out)
}

/// Parallel arcs of a multiloop inside one pants, by cuff pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PantsArcs {
    pub pants: String,
    pub cuffs: [String; 3],
    /// Arcs joining cuffs (0,1), (1,2), (0,2).
    pub arcs: [usize; 3],
}

impl PantsArcs {
    pub fn total(&self) -> usize {
        self.arcs.iter().sum()
    }
}

/// The multiloop N_{i,j}: k parallel arcs between each pair of cuffs in
/// every pants of Mᵢ, arranged inside F to induce ν̂ⱼ. The lamination
/// ν_{i,j} is the limit of iterated left twists of it along Mᵢ ∩ Mᵢ₊₁.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompanionMultiloop {
    pub k: usize,
    pub j: i64,
    pub pants: Vec<PantsArcs>,
    /// Ideal triangulation induced inside F; each edge carries k arcs.
    pub inside: FareyTriangle,
    /// Curves of Mᵢ ∩ Mᵢ₊₁ along which the twist limit is taken.
    pub twist_along: Vec<String>,
    /// Arc data in the pants outside F, identical for every j.
    pub exterior: Vec<PantsArcs>,
}

impl CompanionMultiloop {
    pub fn arcs_per_pants(&self) -> Vec<usize> {
        self.pants.iter().map(PantsArcs::total).collect()
    }
}

/// N_{i,j} for the genus-2 reference decomposition {a₁, a₂, s}. In the torus
/// case F is the handle cut off by s; in the sphere case F is the
/// complement of a₁ ∪ a₂ and the common curves are a₁, a₂.
pub fn companion_multiloop(spec: &LaminationSeqSpec, j: i64) -> Result<CompanionMultiloop, FareyError> {
    let path = interpolation_path(spec, j.min(0), j.max(0))?;
    let inside = path[&j];
    let pants = |name: &str, cuffs: [&str; 3], k: usize| PantsArcs {
        pants: name.into(),
        cuffs: cuffs.map(String::from),
        arcs: [k; 3],
    };
    let (k, all, exterior, along) = match spec.case {
        FareyCase::Torus => {
            let k = 3;
            let p1 = pants("P1", ["a1+", "a1-", "s"], k);
            let p2 = pants("P2", ["a2+", "a2-", "s"], k);
            (k, vec![p1, p2.clone()], vec![p2], vec!["a2".to_string(), "a1 b1 A1 B1".to_string()])
        }
        FareyCase::Sphere => {
            let k = 2;
            let p1 = pants("P1", ["a1+", "a1-", "s"], k);
            let p2 = pants("P2", ["a2+", "a2-", "s"], k);
            (k, vec![p1, p2], Vec::new(), vec!["a1".to_string(), "a2".to_string()])
        }
    };
    Ok(CompanionMultiloop { k, j, pants: all, inside, twist_along: along, exterior })
}
