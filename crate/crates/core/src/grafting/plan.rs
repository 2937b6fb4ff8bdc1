use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{admissible_check, key, Admissibility, GraftError, GraftedStructure};
use crate::farey::{interpolation_path, twist_slope, FareyCase, FareyTriangle, LaminationSeqSpec, Slope, SPIRAL};
use crate::holonomy::{geometric_dehn_twist, HolonomyRep, DEFAULT_BALL};
use crate::lamination::{lamination_angle, AngleOptions, MeasuredLamination, Weight};
use crate::topology::{
    pants_graph_path, validate_pants_decomposition, CurveCatalog, CurveClass, ElementaryMove, MoveCase, PantsDecomposition, PathCap,
};

/// User-supplied angle thresholds: δᵢ for the i-th step (the last one is
/// reused past the end) and ε for the final comparison with λ♭.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaSchedule {
    pub deltas: Vec<f64>,
    pub epsilon: f64,
}

impl DeltaSchedule {
    pub fn uniform(delta: f64) -> Self {
        DeltaSchedule { deltas: vec![delta], epsilon: delta }
    }

    fn validate(&self) -> Result<(), GraftError> {
        if !self.deltas.iter().chain([&self.epsilon]).all(|d| d.is_finite() && *d > 0.0) {
            return Err(GraftError::Invalid("δ schedule entries must be positive".into()));
        }
        Ok(())
    }

    pub fn delta(&self, i: usize) -> f64 {
        self.deltas.get(i).or(self.deltas.last()).copied().unwrap_or(self.epsilon)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanCaps {
    pub path: PathCap,
    pub angle: AngleOptions,
    /// Word length of the catalogue used to complete multiloops to pants
    /// decompositions.
    pub completion_word_length: usize,
    /// Interpolation indices j ∈ [−J, J] recorded per step.
    pub interpolation_steps: i64,
    /// Max difference of FN coordinates for a shared base.
    pub fn_tol: f64,
    /// Largest power j tried for the step loop Tw^j_{mᵢ₊₁}(mᵢ).
    pub twist_max: i64,
}

impl Default for PlanCaps {
    fn default() -> Self {
        PlanCaps { path: PathCap::default(), angle: AngleOptions::default(), completion_word_length: 4, interpolation_steps: 2, fn_tol: 1e-9, twist_max: 16 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    Empty,
    /// C♭ is a graft of C♯ along disjoint loops.
    Direct,
    /// Path through the pants graph.
    Itinerary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub index: usize,
    #[serde(rename = "loop")]
    pub loop_curve: CurveClass,
    /// Exact for direct plans; None in an itinerary, where the count is
    /// only known to exist.
    pub count: Option<u64>,
    /// Itinerary loops are Tw^j_{mᵢ₊₁}(mᵢ); j and the local Farey slope.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twist: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<Slope>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admissibility: Option<Admissibility>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleCertificate {
    pub step: usize,
    pub current: Vec<CurveClass>,
    pub target: Vec<CurveClass>,
    pub angle: f64,
    pub threshold: f64,
    pub ball: usize,
    pub tol: f64,
    pub max_iterate: i64,
    pub stable: bool,
    pub converged: bool,
    pub certified: bool,
    /// ∠(Mᵢ, Mᵢ₊₁): how far the step turns the lamination.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transition_angle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FareyStep {
    pub spec: LaminationSeqSpec,
    pub triangles: BTreeMap<i64, FareyTriangle>,
}

/// Gr_{Mₙ}(Cₙ) = Gr_{M♭}(C♭).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminalGraft {
    pub itinerary_side: Vec<(CurveClass, u64)>,
    pub flat_side: Vec<(CurveClass, u64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraftPlan {
    pub kind: PlanKind,
    pub sharp_pants: Option<PantsDecomposition>,
    pub flat_pants: Option<PantsDecomposition>,
    pub path: Vec<ElementaryMove>,
    pub farey: Vec<FareyStep>,
    pub steps: Vec<PlanStep>,
    pub certificates: Vec<AngleCertificate>,
    pub final_certificate: Option<AngleCertificate>,
    pub terminal: Option<TerminalGraft>,
    pub provenance: String,
    pub certified: bool,
}

fn same_base(x: &GraftedStructure, y: &GraftedStructure, tol: f64) -> Result<(), GraftError> {
    let (a, b) = (x.tau(), y.tau());
    let close = |u: &[f64], v: &[f64]| u.len() == v.len() && u.iter().zip(v).all(|(p, q)| (p - q).abs() <= tol);
    if a.decomposition != b.decomposition || !close(&a.lengths, &b.lengths) || !close(&a.twists, &b.twists) {
        return Err(GraftError::HolonomyMismatch("FN coordinates differ".into()));
    }
    Ok(())
}

fn lamination(genus: usize, curves: &[CurveClass]) -> MeasuredLamination {
    MeasuredLamination::from_multiloop(genus, &curves.iter().map(|c| (c.clone(), Weight::TwoPi(1))).collect::<Vec<_>>())
}

struct Job {
    step: usize,
    current: Vec<CurveClass>,
    target: Vec<CurveClass>,
    threshold: f64,
    before: Option<Vec<CurveClass>>,
}

fn certify(rep: &HolonomyRep, job: &Job, opts: AngleOptions) -> Result<AngleCertificate, GraftError> {
    let g = rep.genus();
    let r = lamination_angle(rep, &lamination(g, &job.current), &lamination(g, &job.target), opts)?;
    let transition_angle = match &job.before {
        Some(b) => Some(lamination_angle(rep, &lamination(g, b), &lamination(g, &job.target), opts)?.angle),
        None => None,
    };
    Ok(AngleCertificate {
        step: job.step,
        current: job.current.clone(),
        target: job.target.clone(),
        angle: r.angle,
        threshold: job.threshold,
        ball: r.ball,
        tol: opts.tol,
        max_iterate: opts.max_iterate,
        stable: r.stable,
        converged: r.converged,
        certified: r.stable && r.converged && r.angle < job.threshold,
        transition_angle,
    })
}

// Certificates are independent; run them on scoped threads and collect in order.
fn certify_all(rep: &HolonomyRep, jobs: &[Job], opts: AngleOptions) -> Result<Vec<AngleCertificate>, GraftError> {
    std::thread::scope(|s| {
        let handles: Vec<_> = jobs.iter().map(|j| s.spawn(move || certify(rep, j, opts))).collect();
        handles.into_iter().map(|h| h.join().expect("certificate task panicked")).collect()
    })
}

struct StepSearch {
    loop_curve: CurveClass,
    twist: i64,
    certificate: AngleCertificate,
}

/// Smallest j ≤ twist_max with ∠(Tw^j_{mᵢ₊₁}(mᵢ) ∪ (Mᵢ ∖ mᵢ), Mᵢ₊₁) below δᵢ.
/// The twisted loops approach the spiralling lamination νᵢ₊₁.
fn search_step(
    rep: &HolonomyRep,
    i: usize,
    mv: &ElementaryMove,
    before: &PantsDecomposition,
    after: &PantsDecomposition,
    threshold: f64,
    caps: &PlanCaps,
) -> Result<StepSearch, GraftError> {
    let rest: Vec<CurveClass> = before.curves.iter().filter(|c| key(c) != key(&mv.removed)).cloned().collect();
    let mut best = None;
    for j in 1..=caps.twist_max.max(1) {
        let l = geometric_dehn_twist(rep, &mv.added, &mv.removed, j, DEFAULT_BALL)?;
        let mut current = rest.clone();
        current.push(l.clone());
        let job = Job { step: i, current, target: after.curves.clone(), threshold, before: Some(before.curves.clone()) };
        let certificate = certify(rep, &job, caps.angle)?;
        let done = certificate.certified;
        best = Some(StepSearch { loop_curve: l, twist: j, certificate });
        if done {
            break;
        }
    }
    Ok(best.expect("at least one power"))
}

/// Extends a multiloop to a pants decomposition, trying `hint` curves first
/// and then catalogued simple curves by word length.
fn complete(support: &[CurveClass], hint: &[CurveClass], catalog: &mut CurveCatalog, word_len: usize) -> Result<PantsDecomposition, GraftError> {
    let g = catalog.genus();
    let target = 3 * g - 3;
    let mut ids: Vec<usize> = Vec::new();
    for c in support {
        let id = catalog.identify(c)?;
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    let mut candidates: Vec<usize> = hint.iter().map(|c| catalog.identify(c)).collect::<Result<_, _>>()?;
    let mut pool = catalog.simple_curves(word_len)?;
    pool.sort_by_key(|&i| (catalog.curve(i).word().len(), key(catalog.curve(i))));
    candidates.extend(pool);
    for cand in candidates {
        if ids.len() >= target {
            break;
        }
        if ids.contains(&cand) || !catalog.entry(cand).simple {
            continue;
        }
        let mut ok = true;
        for &i in &ids {
            if catalog.intersection(i, cand)? != 0 {
                ok = false;
                break;
            }
        }
        if ok {
            ids.push(cand);
        }
    }
    let p = PantsDecomposition::new(g, ids.iter().map(|&i| catalog.curve(i).clone()).collect());
    let cert = validate_pants_decomposition(&p, catalog);
    if !cert.valid {
        return Err(GraftError::CapExhausted(format!("could not complete {:?} to a pants decomposition", support)));
    }
    Ok(p)
}

fn support(c: &GraftedStructure) -> Vec<CurveClass> {
    c.multiloop().iter().map(|(m, _)| m.clone()).collect()
}

/// Grafts taking C♯ to C♭ when C♭'s multiloop contains C♯'s.
fn direct_grafts(sharp: &GraftedStructure, flat: &GraftedStructure) -> Option<Vec<(CurveClass, u64)>> {
    for (c, k) in sharp.multiloop() {
        if flat.multiple_of(c).is_none_or(|kf| kf < *k) {
            return None;
        }
    }
    Some(
        flat.multiloop()
            .iter()
            .filter_map(|(c, kf)| {
                let d = kf - sharp.multiple_of(c).unwrap_or(0);
                (d > 0).then(|| (c.clone(), d))
            })
            .collect(),
    )
}

fn farey_step(i: usize, mv: &ElementaryMove, p: &PantsDecomposition, j: i64) -> Result<FareyStep, GraftError> {
    let case = match mv.case {
        MoveCase::OneHoledTorus => FareyCase::Torus,
        MoveCase::FourHoledSphere => FareyCase::Sphere,
    };
    let names = |v: &[CurveClass]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
    let exterior: Vec<CurveClass> = p.curves.iter().filter(|c| key(c) != key(&mv.removed)).cloned().collect();
    let spec = LaminationSeqSpec {
        index: i,
        case,
        subsurface: format!("complement of {{{}}}", names(&exterior)),
        start: Slope::ZERO,
        end: Slope::INF,
        exterior: format!("{{{}}} with pants laminations spiralling {SPIRAL}", names(&exterior)),
    };
    let triangles = interpolation_path(&spec, -j, j).map_err(|e| GraftError::Invalid(e.to_string()))?;
    Ok(FareyStep { spec, triangles })
}

/// Checked itinerary of grafts from C♯ to C♭ (shared Fuchsian holonomy).
pub fn graft_plan(sharp: &GraftedStructure, flat: &GraftedStructure, delta: &DeltaSchedule, caps: &PlanCaps) -> Result<GraftPlan, GraftError> {
    same_base(sharp, flat, caps.fn_tol)?;
    delta.validate()?;
    let rep = sharp.rep();
    let g = sharp.genus();
    let mut plan = GraftPlan {
        kind: PlanKind::Empty,
        sharp_pants: None,
        flat_pants: None,
        path: Vec::new(),
        farey: Vec::new(),
        steps: Vec::new(),
        certificates: Vec::new(),
        final_certificate: None,
        terminal: None,
        provenance: String::new(),
        certified: true,
    };
    if let Some(grafts) = direct_grafts(sharp, flat) {
        if grafts.is_empty() {
            plan.provenance = "C♯ = C♭".into();
            return Ok(plan);
        }
        plan.kind = PlanKind::Direct;
        plan.provenance = "C♭ is a graft of C♯ along disjoint loops; ν-sequence not needed".into();
        let target = support(flat);
        let mut cur = sharp.clone();
        let mut jobs = Vec::new();
        for (i, (l, k)) in grafts.iter().enumerate() {
            let adm = admissible_check(&cur, l);
            cur = cur.graft(l, *k)?;
            plan.steps.push(PlanStep { index: i, loop_curve: l.clone(), count: Some(*k), twist: None, slope: None, admissibility: Some(adm) });
            jobs.push(Job { step: i, current: support(&cur), target: target.clone(), threshold: delta.delta(i), before: None });
        }
        plan.certificates = certify_all(rep, &jobs, caps.angle)?;
        plan.certified = plan.certificates.iter().all(|c| c.certified) && cur == *flat;
        return Ok(plan);
    }

    plan.kind = PlanKind::Itinerary;
    plan.provenance = format!(
        "νᵢ = Mᵢ with pants laminations spiralling {SPIRAL}; certificate laminations are the multiloops Mᵢ (weights 2π) and the loop grafted at each step"
    );
    let mut catalog = CurveCatalog::new(rep)?;
    let (ls, lf) = (support(sharp), support(flat));
    let m_sharp = complete(&ls, &lf, &mut catalog, caps.completion_word_length)?;
    let m_flat = complete(&lf, &ls, &mut catalog, caps.completion_word_length)?;
    let path = pants_graph_path(&m_sharp, &m_flat, caps.path, &mut catalog)?;
    let mut decomps = vec![m_sharp.clone()];
    for mv in &path {
        let cur = decomps.last().expect("nonempty");
        let mut curves: Vec<CurveClass> = cur.curves.iter().filter(|c| key(c) != key(&mv.removed)).cloned().collect();
        curves.push(mv.added.clone());
        decomps.push(PantsDecomposition::new(g, curves));
    }
    let specs: Vec<FareyStep> = path.iter().enumerate().map(|(i, mv)| farey_step(i, mv, &decomps[i], caps.interpolation_steps)).collect::<Result<_, _>>()?;
    let searches: Vec<Result<StepSearch, GraftError>> = std::thread::scope(|s| {
        let handles: Vec<_> = path
            .iter()
            .enumerate()
            .map(|(i, mv)| {
                let (before, after) = (&decomps[i], &decomps[i + 1]);
                let threshold = delta.delta(i);
                s.spawn(move || search_step(rep, i, mv, before, after, threshold, caps))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("certificate task panicked")).collect()
    });
    let mut certs = Vec::new();
    for (i, (r, spec)) in searches.into_iter().zip(specs).enumerate() {
        let r = r?;
        let slope = twist_slope(spec.spec.case, &spec.spec.end, &spec.spec.start, r.twist as u32);
        plan.steps.push(PlanStep { index: i, loop_curve: r.loop_curve, count: None, twist: Some(r.twist), slope: Some(slope), admissibility: None });
        plan.farey.push(spec);
        certs.push(r.certificate);
    }
    let n = path.len();
    let last = decomps[n].curves.clone();
    // the lamination after the last step: its loop with the rest of Mₙ
    let current = match (path.last(), plan.steps.last()) {
        (Some(mv), Some(st)) => {
            let mut v: Vec<CurveClass> = last.iter().filter(|c| key(c) != key(&mv.added)).cloned().collect();
            v.push(st.loop_curve.clone());
            v
        }
        _ => last.clone(),
    };
    let job = Job { step: n, current, target: lf.clone(), threshold: delta.epsilon, before: None };
    plan.final_certificate = Some(certify(rep, &job, caps.angle)?);
    plan.certificates = certs;
    let ones = |v: &[CurveClass]| v.iter().map(|c| (c.clone(), 1)).collect::<Vec<_>>();
    plan.terminal = Some(TerminalGraft { itinerary_side: ones(&last), flat_side: ones(&m_flat.curves) });
    plan.certified = plan.certificates.iter().chain(&plan.final_certificate).all(|c| c.certified);
    plan.sharp_pants = Some(m_sharp);
    plan.flat_pants = Some(m_flat);
    plan.path = path;
    Ok(plan)
}
