//! Projective structures with Fuchsian holonomy in Thurston coordinates:
//! the hyperbolic surface τ together with a multiloop whose weights are
//! multiples of 2π. Grafting adds flat cylinders and leaves the holonomy alone.

mod plan;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use plan::{graft_plan, AngleCertificate, DeltaSchedule, FareyStep, GraftPlan, PlanCaps, PlanKind, PlanStep, TerminalGraft};

use crate::geometry::{dist_h2, CPoint, FixedPoints, MobiusKind};
use crate::holonomy::{build_from_fn, intersection_count, is_parallel, is_simple, FnCoordinates, HolonomyError, HolonomyRep, DEFAULT_BALL};
use crate::lamination::{MeasuredLamination, Weight};
use crate::topology::{CurveClass, TopologyError, Word};
use crate::{Mobius, H2};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraftError {
    #[error("{0} is not simple")]
    NotSimple(String),
    #[error("{0} is not loxodromic")]
    NotLoxodromic(String),
    #[error("{loop_curve} crosses {member}: requires Thurston-coordinate recomputation (out of scope)")]
    Crossing { loop_curve: String, member: String },
    #[error("invalid structure: {0}")]
    Invalid(String),
    #[error("malformed path: {0}")]
    Path(String),
    #[error("unknown cylinder {0}")]
    UnknownCylinder(String),
    #[error("structures do not share holonomy: {0}")]
    HolonomyMismatch(String),
    #[error("weight overflow")]
    Overflow,
    #[error("cap exhausted: {0}")]
    CapExhausted(String),
    #[error("holonomy: {0}")]
    Holonomy(#[from] HolonomyError),
    #[error("topology: {0}")]
    Topology(String),
}

impl From<TopologyError> for GraftError {
    fn from(e: TopologyError) -> Self {
        match e {
            TopologyError::CapExhausted(s) => GraftError::CapExhausted(s),
            other => GraftError::Topology(other.to_string()),
        }
    }
}

/// Grafted projective structure on a Fuchsian base. Multiloop weights are
/// stored as the integer k of 2πk.
#[derive(Clone, Debug)]
pub struct GraftedStructure {
    tau: FnCoordinates,
    rep: HolonomyRep,
    multiloop: Vec<(CurveClass, u64)>,
}

impl PartialEq for GraftedStructure {
    fn eq(&self, o: &Self) -> bool {
        self.tau == o.tau && self.multiloop == o.multiloop
    }
}

fn key(c: &CurveClass) -> Word {
    c.word().unoriented_key()
}

impl GraftedStructure {
    pub fn new(tau: FnCoordinates, multiloop: Vec<(CurveClass, u64)>) -> Result<Self, GraftError> {
        let rep = build_from_fn(&tau)?;
        Self::with_rep(tau, rep, multiloop)
    }

    /// The ungrafted (uniformizable) structure.
    pub fn fuchsian(tau: FnCoordinates) -> Result<Self, GraftError> {
        Self::new(tau, Vec::new())
    }

    /// Structure over a given Fuchsian representation standing in for τ's
    /// holonomy. No consistency check between the two is made.
    pub fn from_rep(tau: FnCoordinates, rep: HolonomyRep, multiloop: Vec<(CurveClass, u64)>) -> Result<Self, GraftError> {
        if !rep.is_fuchsian() {
            return Err(GraftError::Holonomy(HolonomyError::NotFuchsian));
        }
        Self::with_rep(tau, rep, multiloop)
    }

    fn with_rep(tau: FnCoordinates, rep: HolonomyRep, multiloop: Vec<(CurveClass, u64)>) -> Result<Self, GraftError> {
        let mut c = GraftedStructure { tau, rep, multiloop: Vec::new() };
        for (curve, k) in multiloop {
            if k == 0 {
                return Err(GraftError::Invalid(format!("weight of {curve} must be a positive multiple of 2π")));
            }
            if c.member(&curve)?.is_some() {
                return Err(GraftError::Invalid(format!("{curve} listed twice")));
            }
            c = c.graft(&curve, k)?;
        }
        Ok(c)
    }

    pub fn tau(&self) -> &FnCoordinates {
        &self.tau
    }

    pub fn rep(&self) -> &HolonomyRep {
        &self.rep
    }

    pub fn genus(&self) -> usize {
        self.rep.genus()
    }

    /// Curves with their multiples k (weight 2πk), in canonical order.
    pub fn multiloop(&self) -> &[(CurveClass, u64)] {
        &self.multiloop
    }

    pub fn multiple_of(&self, c: &CurveClass) -> Option<u64> {
        self.multiloop.iter().find(|(m, _)| key(m) == key(c)).map(|(_, k)| *k)
    }

    pub fn thurston(&self) -> ThurstonCoordinates {
        ThurstonCoordinates {
            tau: self.tau.clone(),
            lamination: MeasuredLamination::from_multiloop(
                self.genus(),
                &self.multiloop.iter().map(|(c, k)| (c.clone(), Weight::TwoPi(*k))).collect::<Vec<_>>(),
            ),
        }
    }

    pub fn cylinders(&self) -> Result<Vec<GraftingCylinder>, GraftError> {
        self.multiloop
            .iter()
            .map(|(c, k)| {
                Ok(GraftingCylinder { core: c.clone(), circumference: self.rep.geodesic_length(c)?, height: Weight::TwoPi(*k) })
            })
            .collect()
    }

    fn cylinder(&self, c: &CurveClass) -> Result<GraftingCylinder, GraftError> {
        let k = self.multiple_of(c).ok_or_else(|| GraftError::UnknownCylinder(c.to_string()))?;
        Ok(GraftingCylinder { core: c.clone(), circumference: self.rep.geodesic_length(c)?, height: Weight::TwoPi(k) })
    }

    /// Index of the member homotopic to c, up to orientation.
    fn member(&self, c: &CurveClass) -> Result<Option<usize>, GraftError> {
        if let Some(i) = self.multiloop.iter().position(|(m, _)| key(m) == key(c)) {
            return Ok(Some(i));
        }
        for (i, (m, _)) in self.multiloop.iter().enumerate() {
            if is_parallel(&self.rep, m, c, DEFAULT_BALL)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Members crossed by c.
    fn crossed(&self, c: &CurveClass) -> Result<Vec<&CurveClass>, GraftError> {
        let mut out = Vec::new();
        for (m, _) in &self.multiloop {
            if intersection_count(&self.rep, c, m, DEFAULT_BALL)?.count > 0 {
                out.push(m);
            }
        }
        Ok(out)
    }

    /// Gr_ℓ applied k times.
    pub fn graft(&self, l: &CurveClass, k: u64) -> Result<GraftedStructure, GraftError> {
        if k == 0 {
            return Ok(self.clone());
        }
        if l.genus() != self.genus() {
            return Err(GraftError::Invalid(format!("{l} has genus {}", l.genus())));
        }
        if self.rep.curve(l).classify().kind != MobiusKind::Loxodromic {
            return Err(GraftError::NotLoxodromic(l.to_string()));
        }
        if !is_simple(&self.rep, l, DEFAULT_BALL)? {
            return Err(GraftError::NotSimple(l.to_string()));
        }
        let mut out = self.clone();
        match self.member(l)? {
            Some(i) => {
                out.multiloop[i].1 = out.multiloop[i].1.checked_add(k).ok_or(GraftError::Overflow)?;
            }
            None => {
                if let Some(m) = self.crossed(l)?.first() {
                    return Err(GraftError::Crossing { loop_curve: l.to_string(), member: m.to_string() });
                }
                out.multiloop.push((l.clone(), k));
                out.multiloop.sort_by_key(|(c, _)| key(c));
            }
        }
        Ok(out)
    }

    /// Grafts along every curve of a multiloop.
    pub fn graft_multiloop(&self, m: &[(CurveClass, u64)]) -> Result<GraftedStructure, GraftError> {
        m.iter().try_fold(self.clone(), |c, (l, k)| c.graft(l, *k))
    }
}

#[derive(Serialize, Deserialize)]
struct MemberJson {
    curve: CurveClass,
    two_pi: u64,
}

#[derive(Serialize, Deserialize)]
struct StructureJson {
    tau: FnCoordinates,
    multiloop: Vec<MemberJson>,
}

impl Serialize for GraftedStructure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        StructureJson {
            tau: self.tau.clone(),
            multiloop: self.multiloop.iter().map(|(c, k)| MemberJson { curve: c.clone(), two_pi: *k }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GraftedStructure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = StructureJson::deserialize(d)?;
        let g = j.tau.genus();
        let mut m = Vec::new();
        for e in j.multiloop {
            let c = CurveClass::new(e.curve.word().clone(), g).map_err(serde::de::Error::custom)?;
            m.push((c, e.two_pi));
        }
        GraftedStructure::new(j.tau, m).map_err(serde::de::Error::custom)
    }
}

/// A point of 𝒯 × ℳℒ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThurstonCoordinates {
    pub tau: FnCoordinates,
    pub lamination: MeasuredLamination,
}

/// Flat cylinder inserted along a grafted curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraftingCylinder {
    pub core: CurveClass,
    pub circumference: f64,
    pub height: Weight,
}

/// Boundary length of the surface cut along ℓ, measured as the displacement
/// of a point on the axis, against 2 acosh(|tr ρ(ℓ)| / 2).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLengthCheck {
    pub curve: CurveClass,
    pub boundary_length: f64,
    pub translation_length: f64,
    /// FN length when ℓ is a reference pants curve.
    pub fn_length: Option<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraftLimit {
    pub curve: CurveClass,
    /// (τᵢ, Lᵢ) for i = 0..=i_max.
    pub sequence: Vec<ThurstonCoordinates>,
    pub limit: ThurstonCoordinates,
    pub boundary: BoundaryLengthCheck,
}

/// Point of the axis of a real loxodromic map nearest to i, and the map.
fn axis_point(m: &Mobius) -> Result<H2, GraftError> {
    let FixedPoints::Two(att, rep) = m.fixed_points().map_err(HolonomyError::from)? else {
        return Err(GraftError::NotLoxodromic("axis".into()));
    };
    axis_chart(&att, &rep).map(|(n, t0)| along(&n, t0))?
}

/// Real chart n with n(0) = repelling, n(∞) = attracting, and the log-height
/// of the projection of i onto the imaginary axis in that chart.
fn axis_chart(att: &CPoint<f64>, rep: &CPoint<f64>) -> Result<((Mobius, bool), f64), GraftError> {
    let re = |p: &CPoint<f64>| p.as_real(1e-9);
    let (a, r) = match (re(att), re(rep)) {
        (Some(a), Some(r)) => (a, r),
        _ => return Err(GraftError::Invalid("axis not in the hyperbolic plane".into())),
    };
    let n = match (a, r) {
        (None, Some(r)) => Mobius::from_real(1.0, r, 0.0, 1.0),
        (Some(a), None) => Mobius::from_real(a, -1.0, 1.0, 0.0),
        (Some(a), Some(r)) => {
            let s = (a - r).abs().sqrt();
            Mobius::from_real(a / s, r / s, 1.0 / s, 1.0 / s)
        }
        (None, None) => return Err(GraftError::Invalid("degenerate axis".into())),
    }
    .map_err(HolonomyError::from)?;
    // with negative determinant the chart swaps the half-planes
    let flip = matches!((a, r), (Some(a), Some(r)) if a < r);
    let w = n.inverse().apply(&CPoint::new(0.0, 1.0)).finite().ok_or(GraftError::Invalid("chart".into()))?;
    Ok(((n, flip), w.norm().ln()))
}

fn along(chart: &(Mobius, bool), t: f64) -> Result<H2, GraftError> {
    let (n, flip) = chart;
    let h = t.exp();
    let z = n.apply(&CPoint::new(0.0, if *flip { -h } else { h })).finite().ok_or(GraftError::Invalid("chart".into()))?;
    H2::from_complex(z).map_err(|e| GraftError::Holonomy(e.into()))
}

pub fn boundary_length_check(c: &GraftedStructure, l: &CurveClass) -> Result<BoundaryLengthCheck, GraftError> {
    let m = c.rep.curve(l);
    let p = axis_point(&m)?;
    let q = m.apply(&CPoint::Finite(p.z())).finite().ok_or(GraftError::Invalid("image at infinity".into()))?;
    let boundary_length = dist_h2(&p, &H2::from_complex(q).map_err(|e| GraftError::Holonomy(e.into()))?);
    let translation_length = 2.0 * (m.trace().norm() / 2.0).acosh();
    let fn_length = crate::holonomy::reference_curves()
        .iter()
        .position(|r| c.genus() == 2 && key(r) == key(l))
        .map(|i| c.tau.lengths[i]);
    let mut residual = (boundary_length - translation_length).abs();
    if let Some(f) = fn_length {
        residual = residual.max((boundary_length - f).abs());
    }
    Ok(BoundaryLengthCheck { curve: l.clone(), boundary_length, translation_length, fn_length, residual })
}

/// Lᵢ for Grⁱ_ℓ(C), i = 0..=i_max, and the limit in which ℓ is the only
/// heavy leaf. The base stays τ throughout.
pub fn iterate_graft_limit(c: &GraftedStructure, l: &CurveClass, i_max: u64) -> Result<GraftLimit, GraftError> {
    // validates ℓ once; the weights below are integer arithmetic on the multiple
    let first = c.graft(l, 1)?;
    let idx = first.member(l)?.expect("grafted curve is a member");
    let base = first.multiloop[idx].1 - 1;
    let mut sequence = Vec::new();
    for i in 0..=i_max {
        let mut s = first.clone();
        if i == 0 {
            s = c.clone();
        } else {
            s.multiloop[idx].1 = base.checked_add(i).ok_or(GraftError::Overflow)?;
        }
        sequence.push(s.thurston());
    }
    let mut limit = first.thurston();
    limit.lamination.leaves[idx].weight = Weight::Heavy;
    Ok(GraftLimit { curve: first.multiloop[idx].0.clone(), sequence, limit, boundary: boundary_length_check(c, l)? })
}

/// One piece of a path on the grafted surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathPiece {
    /// Geodesic segment in the hyperbolic region, in the τ chart.
    Hyperbolic { from: H2, to: H2 },
    /// Straight crossing of a cylinder: signed fraction of its height and
    /// horizontal drift along the core.
    Cylinder { curve: CurveClass, height_fraction: f64, drift: f64 },
}

/// Length in the Thurston metric: hyperbolic length outside the cylinders,
/// flat length inside.
pub fn thurston_path_length(c: &GraftedStructure, path: &[PathPiece]) -> Result<f64, GraftError> {
    let mut total = 0.0;
    for piece in path {
        total += match piece {
            PathPiece::Hyperbolic { from, to } => {
                if !(from.x.is_finite() && to.x.is_finite() && from.y > 0.0 && to.y > 0.0 && from.y.is_finite() && to.y.is_finite()) {
                    return Err(GraftError::Path("segment endpoints must lie in the upper half-plane".into()));
                }
                dist_h2(from, to)
            }
            PathPiece::Cylinder { curve, height_fraction, drift } => {
                if !height_fraction.is_finite() || height_fraction.abs() > 1.0 || !drift.is_finite() {
                    return Err(GraftError::Path(format!("bad crossing of {curve}")));
                }
                let cyl = c.cylinder(curve)?;
                let h = height_fraction.abs() * cyl.height.value().expect("finite height");
                h.hypot(*drift)
            }
        };
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfacePoint {
    Hyperbolic { point: H2 },
    /// Point of the cylinder over `curve` at the given height fraction and
    /// arclength position along the core.
    Cylinder { curve: CurveClass, height_fraction: f64, position: f64 },
}

/// The collapsing map κ: identity on the hyperbolic region, the cylinder over
/// ℓ onto the geodesic ℓ. Core positions are measured along the axis of ρ(ℓ)
/// from the foot of the perpendicular from i, towards the attracting end.
pub fn collapse_point(c: &GraftedStructure, p: &SurfacePoint) -> Result<H2, GraftError> {
    match p {
        SurfacePoint::Hyperbolic { point } => Ok(*point),
        SurfacePoint::Cylinder { curve, height_fraction, position } => {
            c.cylinder(curve)?;
            if !(0.0..=1.0).contains(height_fraction) || !position.is_finite() {
                return Err(GraftError::Path(format!("bad cylinder point on {curve}")));
            }
            let m = c.rep.curve(curve);
            let FixedPoints::Two(att, rep) = m.fixed_points().map_err(HolonomyError::from)? else {
                return Err(GraftError::NotLoxodromic(curve.to_string()));
            };
            let (chart, t0) = axis_chart(&att, &rep)?;
            along(&chart, t0 + position)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Admissibility {
    Certified,
    Rejected(String),
    Undecided(String),
}

/// Admissible loops on a grafted Fuchsian structure. Outside the grafting
/// cylinders the structure is hyperbolic, so a simple loop missing them
/// develops to an embedded axis.
pub fn admissible_check(c: &GraftedStructure, l: &CurveClass) -> Admissibility {
    if l.genus() != c.genus() {
        return Admissibility::Rejected(format!("{l} is not a curve on this surface"));
    }
    if c.rep.curve(l).classify().kind != MobiusKind::Loxodromic {
        return Admissibility::Rejected("not loxodromic".into());
    }
    match is_simple(&c.rep, l, DEFAULT_BALL) {
        Ok(true) => {}
        Ok(false) => return Admissibility::Rejected("not simple".into()),
        Err(e) => return Admissibility::Undecided(e.to_string()),
    }
    match c.member(l) {
        Ok(Some(_)) => return Admissibility::Certified,
        Ok(None) => {}
        Err(e) => return Admissibility::Undecided(e.to_string()),
    }
    match c.crossed(l) {
        Ok(v) if v.is_empty() => Admissibility::Certified,
        Ok(v) => Admissibility::Undecided(format!("meets the cylinder over {}: outside implemented regime", v[0])),
        Err(e) => Admissibility::Undecided(e.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpiralClass {
    Spirals,
    RoughlyCircular,
}

/// Spiralling of a lift along a loxodromic λ fixing 0 and ∞ whose developed
/// lift winds by `winding` per period: the argument θ grows by `winding`
/// each period, so it is bounded iff the winding is zero.
pub fn spiral_classify(lambda: &Mobius, winding: f64) -> Result<SpiralClass, GraftError> {
    let l = lambda.complex_length().map_err(|_| GraftError::NotLoxodromic("λ".into()))?;
    let scale = lambda.a().norm().max(lambda.d().norm());
    if lambda.b().norm() > 1e-12 * scale || lambda.c().norm() > 1e-12 * scale {
        return Err(GraftError::Invalid("λ must fix 0 and ∞".into()));
    }
    if !winding.is_finite() {
        return Err(GraftError::Invalid("winding must be finite".into()));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = (winding - l.im) / two_pi;
    if (r - r.round()).abs() > 1e-9 {
        return Err(GraftError::Invalid(format!("winding {winding} is not Im ℒ + 2πℤ (Im ℒ = {})", l.im)));
    }
    Ok(if winding.abs() < 1e-12 { SpiralClass::RoughlyCircular } else { SpiralClass::Spirals })
}
