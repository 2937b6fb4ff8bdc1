use anyhow::{anyhow, bail, Result};
use glab_core::grafting::{graft_plan, iterate_graft_limit, GraftError, GraftedStructure};
use glab_core::lamination::{MeasuredLamination, Weight};
use glab_core::pleated::{bending_angles, convergence_experiment, edge_mismatch, equivariance_residual, isometry_defect, realize_with_radius, sample_battery};
use glab_core::schottky::{density_batch, ping_pong_certify, random_multiloop_targets, SchottkyCertificate, SchottkyError, SphereCap};
use glab_core::topology::{CurveClass, Word};
use glab_core::{Mobius, Point};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig};
use crate::report::{num, opt, CurvePlot, Plot, Series, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Certified,
    CapExhausted,
    Uncertified,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Certified => 0,
            Status::CapExhausted => 2,
            Status::Uncertified => 1,
        }
    }
}

/// One checked numeric claim: passed iff value < threshold, or value > threshold when `above`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub claim: String,
    #[serde(with = "glab_core::serde_ext")]
    pub value: f64,
    pub threshold: f64,
    pub above: bool,
    pub passed: bool,
}

fn below(claim: impl Into<String>, value: f64, threshold: f64) -> Claim {
    Claim { claim: claim.into(), value, threshold, above: false, passed: value < threshold }
}

fn above(claim: impl Into<String>, value: f64, threshold: f64) -> Claim {
    Claim { claim: claim.into(), value, threshold, above: true, passed: value > threshold }
}

fn holds(claim: impl Into<String>, ok: bool) -> Claim {
    Claim { claim: claim.into(), value: ok as u8 as f64, threshold: 0.5, above: true, passed: ok }
}

/// The JSON part of a run. The CSV table and SVG plot travel alongside.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunArtifact {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub status: Status,
    pub cap_exhausted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Caps and tolerances every claim below was computed under.
    pub truncation: Value,
    pub certificates: Vec<Claim>,
    pub result: Value,
    pub config: ExperimentConfig,
}

pub struct Run {
    pub artifact: RunArtifact,
    pub csv: String,
    pub svg: String,
}

struct Outcome {
    status: Option<Status>,
    error: Option<String>,
    truncation: Value,
    claims: Vec<Claim>,
    result: Value,
    table: Table,
    svg: Box<dyn Fn(&str) -> String>,
}

fn status_of(claims: &[Claim]) -> Status {
    if claims.iter().all(|c| c.passed) {
        Status::Certified
    } else {
        Status::Uncertified
    }
}

/// Validates and runs; precondition failures are errors, cap exhaustion is
/// a flagged artifact.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Run> {
    cfg.validate()?;
    let hash = cfg.hash();
    let o = match &cfg.experiment {
        Experiment::GraftIterate { .. } => graft_iterate(cfg)?,
        Experiment::GraftPlan { .. } => graft_plan_run(cfg)?,
        Experiment::PleatedRealize { .. } => pleated_realize(cfg)?,
        Experiment::PleatedConverge { .. } => pleated_converge(cfg)?,
        Experiment::SchottkyCert { .. } => schottky_cert(cfg)?,
        Experiment::Density { .. } => density(cfg)?,
    };
    let status = o.status.unwrap_or_else(|| status_of(&o.claims));
    let artifact = RunArtifact {
        experiment: cfg.experiment.id().into(),
        config_hash: hash.clone(),
        seed: cfg.seed,
        status,
        cap_exhausted: status == Status::CapExhausted,
        error: o.error,
        truncation: o.truncation,
        certificates: o.claims,
        result: o.result,
        config: cfg.clone(),
    };
    Ok(Run { artifact, csv: o.table.to_csv(&hash)?, svg: (o.svg)(&hash) })
}

fn graft_iterate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let Experiment::GraftIterate { tau, loop_curve, imax, tol } = &cfg.experiment else { unreachable!() };
    let base = GraftedStructure::fuchsian(tau.clone())?;
    let l = CurveClass::parse(loop_curve, tau.genus())?;
    let lim = iterate_graft_limit(&base, &l, *imax)?;
    let mut table = Table::new(&["i", "weight_multiple", "weight", "tau_fixed"]);
    let mut claims = Vec::new();
    let mut exact = true;
    let mut pts = Vec::new();
    for (i, t) in lim.sequence.iter().enumerate() {
        let w = t.lamination.weight_of(&lim.curve);
        let k = match w {
            Some(Weight::TwoPi(k)) => Some(k),
            None if i == 0 => Some(0),
            _ => None,
        };
        let fixed = t.tau == *tau;
        exact &= fixed && k == Some(i as u64);
        let value = w.and_then(|w| w.value()).unwrap_or(0.0);
        pts.push((i as f64, value));
        table.push(vec![i.to_string(), k.map(|k| k.to_string()).unwrap_or_default(), num(value), fixed.to_string()]);
    }
    claims.push(holds(format!("tau_i = tau and weight of {} is 2 pi i for i <= {imax}", lim.curve), exact));
    let heavy = lim.limit.lamination.heavy_leaves();
    claims.push(holds(format!("{} is the only heavy leaf of the limit", lim.curve), heavy.len() == 1 && *heavy[0] == lim.curve));
    claims.push(below("boundary length minus translation length", lim.boundary.residual, *tol));
    let plot = Plot {
        title: format!("graft iterates along {}", lim.curve),
        x_label: "i".into(),
        y_label: "weight".into(),
        log_y: false,
        series: vec![Series { name: format!("weight of {}", lim.curve), points: pts }],
        rules: Vec::new(),
    };
    Ok(Outcome {
        status: None,
        error: None,
        truncation: json!({ "imax": imax, "tol": tol }),
        claims,
        result: serde_json::to_value(&lim)?,
        table,
        svg: Box::new(move |h| plot.to_svg(h)),
    })
}

fn graft_plan_run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let Experiment::GraftPlan { sharp, flat, delta, caps } = &cfg.experiment else { unreachable!() };
    let truncation = json!({ "caps": caps, "delta": delta });
    let mut table = Table::new(&["step", "angle", "threshold", "transition_angle", "ball", "stable", "converged", "certified"]);
    let plan = match graft_plan(sharp, flat, delta, caps) {
        Ok(p) => p,
        Err(GraftError::CapExhausted(why)) => {
            let plot = Plot { title: "graft plan: cap exhausted".into(), x_label: "step".into(), y_label: "angle".into(), log_y: false, series: Vec::new(), rules: Vec::new() };
            return Ok(Outcome {
                status: Some(Status::CapExhausted),
                error: Some(format!("cap exhausted: {why}")),
                truncation,
                claims: Vec::new(),
                result: Value::Null,
                table,
                svg: Box::new(move |h| plot.to_svg(h)),
            });
        }
        Err(e) => return Err(e.into()),
    };
    let mut claims = Vec::new();
    let mut angles = Vec::new();
    let mut thresholds = Vec::new();
    for (label, c) in plan.certificates.iter().map(|c| (c.step.to_string(), c)).chain(plan.final_certificate.iter().map(|c| ("final".to_string(), c))) {
        let x = if label == "final" { plan.certificates.len() as f64 } else { c.step as f64 };
        angles.push((x, c.angle));
        thresholds.push((x, c.threshold));
        table.push(vec![
            label.clone(),
            num(c.angle),
            num(c.threshold),
            opt(c.transition_angle),
            c.ball.to_string(),
            c.stable.to_string(),
            c.converged.to_string(),
            c.certified.to_string(),
        ]);
        claims.push(Claim { claim: format!("angle certificate {label}"), value: c.angle, threshold: c.threshold, above: false, passed: c.certified });
    }
    claims.push(holds("plan certified", plan.certified));
    let plot = Plot {
        title: format!("graft plan ({:?})", plan.kind).to_lowercase(),
        x_label: "step".into(),
        y_label: "angle".into(),
        log_y: false,
        series: vec![Series { name: "certificate angle".into(), points: angles }, Series { name: "threshold".into(), points: thresholds }],
        rules: Vec::new(),
    };
    Ok(Outcome { status: None, error: None, truncation, claims, result: serde_json::to_value(&plan)?, table, svg: Box::new(move |h| plot.to_svg(h)) })
}

fn pleated_realize(cfg: &ExperimentConfig) -> Result<Outcome> {
    let Experiment::PleatedRealize { rep, lamination, radius, tol } = &cfg.experiment else { unreachable!() };
    let beta = realize_with_radius(rep, lamination, *radius)?;
    let samples = sample_battery(beta.triangles.len());
    let residual = equivariance_residual(&beta, &samples)?;
    let mismatch = edge_mismatch(&beta)?;
    let defect = isometry_defect(&beta);
    let bends = bending_angles(&beta);
    let mut table = Table::new(&["triangle", "edge", "neighbour", "neighbour_edge", "angle"]);
    for b in &bends {
        table.push(vec![b.triangle.to_string(), b.edge.to_string(), b.neighbour.to_string(), b.neighbour_edge.to_string(), num(b.angle)]);
    }
    let claims = vec![
        below(format!("equivariance residual over {} samples and all generators", samples.len()), residual, *tol),
        below("edge mismatch between glued triangles", mismatch, *tol),
    ];
    let plot = Plot {
        title: "bending angles".into(),
        x_label: "edge index".into(),
        y_label: "exterior dihedral angle".into(),
        log_y: false,
        series: vec![Series { name: "angle".into(), points: bends.iter().enumerate().map(|(k, b)| (k as f64, b.angle)).collect() }],
        rules: Vec::new(),
    };
    let result = json!({
        "samples": samples.len(),
        "equivariance_residual": residual,
        "edge_mismatch": mismatch,
        "isometry_defect": defect,
        "max_bending_angle": bends.iter().map(|b| b.angle.abs()).fold(0.0, f64::max),
        "bending_angles": bends,
        "surface": beta,
    });
    Ok(Outcome {
        status: None,
        error: None,
        truncation: json!({ "radius": radius, "certified_radius": beta.certified_radius, "tol": tol }),
        claims,
        result,
        table,
        svg: Box::new(move |h| plot.to_svg(h)),
    })
}

fn pleated_converge(cfg: &ExperimentConfig) -> Result<Outcome> {
    let Experiment::PleatedConverge { rep, spec, jmin, jmax, tol, options } = &cfg.experiment else { unreachable!() };
    let t = convergence_experiment(rep, spec, *jmin, *jmax, options)?;
    let mut table = Table::new(&["j", "triangle", "d_end", "d_start", "failure"]);
    for r in &t.rows {
        let tri: Vec<String> = r.triangle.slopes().iter().map(|s| s.to_string()).collect();
        table.push(vec![r.j.to_string(), tri.join(" "), opt(r.toward_end), opt(r.toward_start), r.failure.clone().unwrap_or_default()]);
    }
    let failures = t.rows.iter().filter(|r| r.failure.is_some()).count();
    let claims = vec![
        holds("every surface realized and located", failures == 0),
        holds(format!("D toward slope {} non-increasing for j >= 0", spec.end), t.end_tail_non_increasing),
        holds(format!("D toward slope {} non-increasing as j decreases from 0", spec.start), t.start_tail_non_increasing),
        below(format!("D({jmax}) toward slope {}", spec.end), t.final_toward_end.unwrap_or(f64::INFINITY), *tol),
        below(format!("D({jmin}) toward slope {}", spec.start), t.final_toward_start.unwrap_or(f64::INFINITY), *tol),
    ];
    let series = |name: &str, f: fn(&glab_core::pleated::ConvergenceRow) -> Option<f64>| Series {
        name: name.into(),
        points: t.rows.iter().filter_map(|r| Some((r.j as f64, f(r)?))).collect(),
    };
    let plot = Plot {
        title: format!("D(j), handle {}, {} samples", t.handle, t.samples),
        x_label: "j".into(),
        y_label: "D(j)".into(),
        log_y: true,
        series: vec![series(&format!("toward {}", spec.end), |r| r.toward_end), series(&format!("toward {}", spec.start), |r| r.toward_start)],
        rules: vec![(*tol, "tol".into())],
    };
    Ok(Outcome {
        status: None,
        error: None,
        truncation: json!({ "jmin": jmin, "jmax": jmax, "tol": tol, "samples": t.samples, "max_walk": options.max_walk }),
        claims,
        result: serde_json::to_value(&t)?,
        table,
        svg: Box::new(move |h| plot.to_svg(h)),
    })
}

fn sphere(p: &Point) -> [f64; 3] {
    match p.finite() {
        None => [0.0, 0.0, 1.0],
        Some(z) => {
            let d = 1.0 + z.norm_sqr();
            [2.0 * z.re / d, 2.0 * z.im / d, (z.norm_sqr() - 1.0) / d]
        }
    }
}

/// Boundary circle of a cap, projected back to the plane; split where it
/// leaves a large window.
fn cap_boundary(cap: &SphereCap, clip: f64) -> Vec<Vec<(f64, f64)>> {
    let c = sphere(&cap.center);
    let e = if c[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let dot = c[0] * e[0] + c[1] * e[1] + c[2] * e[2];
    let mut u = [e[0] - dot * c[0], e[1] - dot * c[1], e[2] - dot * c[2]];
    let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u.iter_mut().for_each(|x| *x /= n);
    let v = [c[1] * u[2] - c[2] * u[1], c[2] * u[0] - c[0] * u[2], c[0] * u[1] - c[1] * u[0]];
    let (cr, sr) = (cap.radius.cos(), cap.radius.sin());
    let mut pieces = vec![Vec::new()];
    for k in 0..=256 {
        let t = std::f64::consts::TAU * k as f64 / 256.0;
        let p: Vec<f64> = (0..3).map(|i| cr * c[i] + sr * (u[i] * t.cos() + v[i] * t.sin())).collect();
        let d = 1.0 - p[2];
        let w = if d > 1e-12 { Some((p[0] / d, p[1] / d)) } else { None };
        match w {
            Some((x, y)) if x.abs() <= clip && y.abs() <= clip => pieces.last_mut().unwrap().push((x, y)),
            _ if !pieces.last().unwrap().is_empty() => pieces.push(Vec::new()),
            _ => {}
        }
    }
    pieces.retain(|p| p.len() > 1);
    pieces
}

fn point_columns(p: &Point) -> [String; 2] {
    match p.finite() {
        Some(z) => [num(z.re), num(z.im)],
        None => ["inf".into(), "inf".into()],
    }
}

fn schottky_cert(cfg: &ExperimentConfig) -> Result<Outcome> {
    let Experiment::SchottkyCert { rep, gens, caps } = &cfg.experiment else { unreachable!() };
    let mut mats: Vec<Mobius> = Vec::new();
    for g in gens {
        let w: Word = g.parse().map_err(|e| anyhow!("generator {g:?}: {e}"))?;
        if w.letters().iter().any(|l| l.generator() >= 2 * rep.genus()) {
            bail!("generator {g:?} uses a letter outside genus {}", rep.genus());
        }
        mats.push(rep.eval(&w));
    }
    let cert: SchottkyCertificate = ping_pong_certify(&mats, caps);
    let mut table = Table::new(&[
        "generator",
        "word",
        "trace_sq_re",
        "trace_sq_im",
        "minus_center_re",
        "minus_center_im",
        "minus_radius",
        "plus_center_re",
        "plus_center_im",
        "plus_radius",
        "mapping_margin",
        "verified_margin",
    ]);
    let mut claims = vec![above("constructed disjointness margin", cert.disjointness_margin, 0.0)];
    let mut curves = Vec::new();
    let clip = 8.0;
    for (i, g) in gens.iter().enumerate() {
        let ts = mats[i].trace_sq();
        let d = cert.disks.get(i);
        let m = cert.mapping_margins.get(i).copied();
        let vm = cert.verification.as_ref().and_then(|v| v.mapping_margins.get(i).copied());
        let cap_cols = |c: Option<&SphereCap>| match c {
            Some(c) => {
                let [x, y] = point_columns(&c.center);
                [x, y, num(c.radius)]
            }
            None => Default::default(),
        };
        let [a, b, c] = cap_cols(d.map(|d| &d.minus));
        let [e, f, h] = cap_cols(d.map(|d| &d.plus));
        table.push(vec![i.to_string(), g.clone(), num(ts.re), num(ts.im), a, b, c, e, f, h, opt(m), opt(vm)]);
        if let Some(m) = m {
            claims.push(above(format!("generator {g} maps the complement of its minus disk into its plus disk"), m, 0.0));
        }
        if let Some(d) = d {
            curves.push((format!("{g} -"), cap_boundary(&d.minus, clip)));
            curves.push((format!("{g} +"), cap_boundary(&d.plus, clip)));
        }
    }
    if let Some(v) = &cert.verification {
        claims.push(above("independently recomputed disjointness margin", v.disjointness_margin, 0.0));
        claims.push(above("independently recomputed mapping margin", v.mapping_margins.iter().copied().fold(f64::INFINITY, f64::min), 0.0));
    }
    claims.push(holds("ping-pong certified", cert.certified));
    let status = if cert.certified {
        Status::Certified
    } else if cert.verification.is_some() {
        // the search ran out of rounds without positive margins
        Status::CapExhausted
    } else {
        Status::Uncertified
    };
    let window = curves.iter().flat_map(|(_, p)| p.iter().flatten()).map(|(x, y)| x.abs().max(y.abs())).fold(0.0, f64::max).clamp(1.0, clip) * 1.1;
    let plot = CurvePlot { title: "ping-pong disks (stereographic plane)".into(), window, curves };
    Ok(Outcome {
        status: Some(status),
        error: cert.failure.clone(),
        truncation: json!({ "caps": caps }),
        claims,
        result: serde_json::to_value(&cert)?,
        table,
        svg: Box::new(move |h| plot.to_svg(h)),
    })
}

fn describe(l: &MeasuredLamination) -> String {
    let leaves: Vec<String> = l
        .leaves
        .iter()
        .map(|leaf| match leaf.weight {
            Weight::TwoPi(k) => format!("{}:2pi*{k}", leaf.curve),
            Weight::Real(x) => format!("{}:{}", leaf.curve, num(x)),
            Weight::Heavy => format!("{}:inf", leaf.curve),
        })
        .collect();
    let mut s = leaves.join("; ");
    if let Some(t) = &l.twist_limit {
        let base: Vec<String> = t.base.iter().map(|(c, k)| format!("{c}:{k}")).collect();
        let along: Vec<String> = t.along.iter().map(|c| c.to_string()).collect();
        s = format!("lim Tw[{}]^n({})", along.join("; "), base.join("; "));
    }
    s
}

fn density(cfg: &ExperimentConfig) -> Result<Outcome> {
    let Experiment::Density { rep, targets, random, eps, caps, threads } = &cfg.experiment else { unreachable!() };
    let mut all: Vec<(String, MeasuredLamination)> = targets.iter().map(|t| ("given".to_string(), t.clone())).collect();
    all.extend(random_multiloop_targets(cfg.seed, *random)?.into_iter().map(|t| ("random".to_string(), t)));
    let lams: Vec<MeasuredLamination> = all.iter().map(|(_, t)| t.clone()).collect();
    let results = density_batch(rep, &lams, *eps, caps, *threads);
    let mut table = Table::new(&["index", "source", "target", "kind", "parameter", "distance", "eps", "within_eps", "approximant", "error"]);
    let mut claims = Vec::new();
    let mut rows = Vec::new();
    let mut exhausted = false;
    let mut pts = Vec::new();
    for (i, ((src, target), r)) in all.iter().zip(results).enumerate() {
        let (res, err) = match r {
            Ok(d) => (Some(d), None),
            Err(SchottkyError::DensityCaps(best)) => {
                exhausted = true;
                (Some(*best), Some("caps exhausted".to_string()))
            }
            Err(e @ SchottkyError::Precondition(_)) => return Err(e.into()),
            Err(e) => (None, Some(e.to_string())),
        };
        let name = format!("target {i}");
        match &res {
            Some(d) => {
                pts.push((i as f64, d.distance));
                claims.push(Claim { claim: format!("{name} within eps"), value: d.distance, threshold: *eps, above: false, passed: d.within_eps && err.is_none() });
                table.push(vec![
                    i.to_string(),
                    src.clone(),
                    describe(target),
                    serde_json::to_value(d.kind)?.as_str().unwrap_or_default().to_string(),
                    d.parameter.to_string(),
                    num(d.distance),
                    num(*eps),
                    d.within_eps.to_string(),
                    describe(&d.approximant),
                    err.clone().unwrap_or_default(),
                ]);
            }
            None => {
                claims.push(holds(format!("{name} within eps"), false));
                table.push(vec![i.to_string(), src.clone(), describe(target), String::new(), String::new(), String::new(), num(*eps), "false".into(), String::new(), err.clone().unwrap_or_default()]);
            }
        }
        rows.push(json!({ "index": i, "source": src, "target": target, "result": res, "error": err }));
    }
    let status = if exhausted { Some(Status::CapExhausted) } else { None };
    let plot = Plot {
        title: format!("density: {} targets", all.len()),
        x_label: "target".into(),
        y_label: "sup-norm distance".into(),
        log_y: false,
        series: vec![Series { name: "distance".into(), points: pts }],
        rules: vec![(*eps, "eps".into())],
    };
    Ok(Outcome {
        status,
        error: exhausted.then(|| "density caps exhausted for at least one target".into()),
        truncation: json!({ "caps": caps, "eps": eps, "generator": "ChaCha8", "random_targets": random }),
        claims,
        result: Value::Array(rows),
        table,
        svg: Box::new(move |h| plot.to_svg(h)),
    })
}
