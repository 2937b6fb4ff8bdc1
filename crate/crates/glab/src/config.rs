use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use glab_core::farey::{LaminationSeqSpec, Slope};
use glab_core::grafting::{DeltaSchedule, GraftedStructure, PlanCaps};
use glab_core::holonomy::{build_bent, build_from_fn, FnCoordinates, HolonomyRep};
use glab_core::lamination::MeasuredLamination;
use glab_core::pleated::{ConvergenceOptions, SpiralLamination};
use glab_core::schottky::{DensityCaps, PingPongCaps};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_SEED: u64 = 7;

/// Inputs are embedded by value, so a config (or the copy inside an
/// artifact) is enough to reproduce a run without the original files.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum Experiment {
    GraftIterate {
        tau: FnCoordinates,
        #[serde(rename = "loop")]
        loop_curve: String,
        imax: u64,
        tol: f64,
    },
    GraftPlan {
        sharp: GraftedStructure,
        flat: GraftedStructure,
        delta: DeltaSchedule,
        caps: PlanCaps,
    },
    PleatedRealize {
        rep: HolonomyRep,
        lamination: SpiralLamination,
        radius: Option<usize>,
        tol: f64,
    },
    PleatedConverge {
        rep: HolonomyRep,
        spec: LaminationSeqSpec,
        jmin: i64,
        jmax: i64,
        tol: f64,
        options: ConvergenceOptions,
    },
    SchottkyCert {
        rep: HolonomyRep,
        gens: Vec<String>,
        caps: PingPongCaps,
    },
    Density {
        rep: HolonomyRep,
        targets: Vec<MeasuredLamination>,
        /// Extra targets drawn with ChaCha8 from the seed.
        random: usize,
        eps: f64,
        caps: DensityCaps,
        threads: usize,
    },
}

impl Experiment {
    pub fn id(&self) -> &'static str {
        match self {
            Experiment::GraftIterate { .. } => "graft-iterate",
            Experiment::GraftPlan { .. } => "graft-plan",
            Experiment::PleatedRealize { .. } => "pleated-realize",
            Experiment::PleatedConverge { .. } => "pleated-converge",
            Experiment::SchottkyCert { .. } => "schottky-cert",
            Experiment::Density { .. } => "density",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Role to path, as given on the command line.
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        bail!("{name} must be positive, got {x}");
    }
    Ok(())
}

fn nonzero(name: &str, n: u64) -> Result<()> {
    if n == 0 {
        bail!("{name} must be positive");
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig { experiment, inputs: BTreeMap::new(), seed: DEFAULT_SEED }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.experiment {
            Experiment::GraftIterate { tau, imax, tol, .. } => {
                tau.validate()?;
                nonzero("imax", *imax)?;
                positive("tol", *tol)
            }
            Experiment::GraftPlan { caps, .. } => {
                nonzero("caps.path.depth", caps.path.depth as u64)?;
                nonzero("caps.completion_word_length", caps.completion_word_length as u64)?;
                nonzero("caps.twist_max", caps.twist_max.max(0) as u64)?;
                positive("caps.fn_tol", caps.fn_tol)
            }
            Experiment::PleatedRealize { radius, tol, .. } => {
                if let Some(r) = radius {
                    nonzero("radius", *r as u64)?;
                }
                positive("tol", *tol)
            }
            Experiment::PleatedConverge { jmin, jmax, tol, options, .. } => {
                if jmin > jmax {
                    bail!("jmin {jmin} exceeds jmax {jmax}");
                }
                nonzero("options.max_walk", options.max_walk as u64)?;
                positive("tol", *tol)
            }
            Experiment::SchottkyCert { gens, caps, .. } => {
                if gens.is_empty() {
                    bail!("no generators given");
                }
                nonzero("caps.rounds", caps.rounds as u64)?;
                nonzero("caps.isometric_powers", caps.isometric_powers as u64)
            }
            Experiment::Density { targets, random, eps, caps, .. } => {
                if targets.is_empty() && *random == 0 {
                    bail!("no density targets");
                }
                positive("eps", *eps)?;
                nonzero("caps.max_scale", caps.max_scale)?;
                nonzero("caps.max_twist", caps.max_twist.max(0) as u64)?;
                nonzero("caps.max_ball", caps.max_ball as u64)
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// Reads a config, or the config embedded in an artifact.
    pub fn load(path: &Path) -> Result<Self> {
        let v: serde_json::Value = read_json(path)?;
        let v = match v.get("config") {
            Some(c) if v.get("config_hash").is_some() => c.clone(),
            _ => v,
        };
        let cfg: ExperimentConfig = serde_json::from_value(v).with_context(|| format!("config schema in {}", path.display()))?;
        Ok(cfg)
    }
}

pub fn standard_fn() -> FnCoordinates {
    FnCoordinates::genus2([2.0, 2.0, 2.0], [0.0, 0.0, 0.0])
}

pub fn standard_rep() -> HolonomyRep {
    build_from_fn(&standard_fn()).expect("standard structure")
}

/// The flagship deformation: bending 0.05 along a1.
pub fn bent_rep() -> HolonomyRep {
    build_bent(&standard_fn(), &[0.05, 0.0, 0.0]).expect("bent structure")
}

pub fn standard_spec() -> LaminationSeqSpec {
    LaminationSeqSpec::torus(1, Slope::ZERO, Slope::INF)
}

#[derive(Debug, thiserror::Error)]
#[error("byte {offset} (line {line}, column {column}): {message}")]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Like serde_json::from_str, with the error located by byte offset.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> std::result::Result<T, ParseError> {
    serde_json::from_str(text).map_err(|e| {
        let (line, column) = (e.line(), e.column());
        let offset = if line == 0 {
            0
        } else {
            let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
            (start + column).min(text.len())
        };
        let message = e.to_string();
        let message = message.rsplit_once(" at line ").map_or(message.as_str(), |(m, _)| m).to_string();
        ParseError { offset, line, column, message }
    })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_json(&text).with_context(|| format!("parsing {}", path.display()))
}

/// A rep file holds either a HolonomyRep or FN coordinates.
pub fn read_rep(path: &Path) -> Result<HolonomyRep> {
    let v: serde_json::Value = read_json(path)?;
    if v.get("generators").is_some() {
        return serde_json::from_value(v).with_context(|| format!("rep in {}", path.display()));
    }
    let f: FnCoordinates = serde_json::from_value(v).with_context(|| format!("rep or FN coordinates in {}", path.display()))?;
    Ok(build_from_fn(&f)?)
}

/// One lamination or an array of them.
pub fn read_targets(path: &Path) -> Result<Vec<MeasuredLamination>> {
    let v: serde_json::Value = read_json(path)?;
    let out = if v.is_array() { serde_json::from_value(v) } else { serde_json::from_value(v).map(|l| vec![l]) };
    out.with_context(|| format!("measured lamination in {}", path.display()))
}

pub fn parse_gens(s: &str) -> Vec<String> {
    s.split(',').map(|g| g.split_whitespace().collect::<Vec<_>>().join(" ")).filter(|g| !g.is_empty()).collect()
}

