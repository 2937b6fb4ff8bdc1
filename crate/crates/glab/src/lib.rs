//! Reproducible experiment runs: a config goes in, a directory with a JSON
//! artifact, a CSV table and an SVG plot comes out.

pub mod config;
pub mod experiments;
pub mod report;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub use config::{Experiment, ExperimentConfig};
pub use experiments::{run_experiment, Claim, Run, RunArtifact, Status};

pub const OUT_ENV: &str = "GLAB_OUT";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("glab-out"))
}

/// `<root>/<experiment>-<hash prefix>/`; nothing is written elsewhere.
pub fn output_dir(root: &Path, artifact: &RunArtifact) -> PathBuf {
    root.join(format!("{}-{}", artifact.experiment, &artifact.config_hash[..12]))
}

pub fn write_run(run: &Run, root: &Path) -> Result<PathBuf> {
    let dir = output_dir(root, &run.artifact);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let id = &run.artifact.experiment;
    let mut json = serde_json::to_string_pretty(&run.artifact)?;
    json.push('\n');
    for (ext, body) in [("json", &json), ("csv", &run.csv), ("svg", &run.svg)] {
        let p = dir.join(format!("{id}.{ext}"));
        std::fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(dir)
}
