use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use glab::config::{self, Experiment, ExperimentConfig};
use glab_core::grafting::{DeltaSchedule, PlanCaps};
use glab_core::pleated::{ConvergenceOptions, SpiralLamination};
use glab_core::schottky::{DensityCaps, PingPongCaps};

/// Desk-scale experiments on projective structures, grafting, pleated
/// surfaces and Schottky groups. Outputs go to $GLAB_OUT (default ./glab-out).
/// Exit status: 0 certified, 2 cap exhausted, 1 error or not certified.
#[derive(Parser)]
#[command(name = "glab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    #[command(subcommand)]
    Graft(GraftCmd),
    #[command(subcommand)]
    Pleated(PleatedCmd),
    #[command(subcommand)]
    Schottky(SchottkyCmd),
    /// Approximate measured laminations by 2π-weighted multiloops.
    Density(DensityArgs),
    /// Re-run from a config file or from a previous artifact.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Config file (or artifact JSON); flags given alongside override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum GraftCmd {
    /// Grⁱ along one loop for i ≤ imax, and the limit.
    Iterate {
        #[command(flatten)]
        common: Common,
        /// FN coordinates (JSON); default lengths 2, twists 0.
        #[arg(long = "fn")]
        fn_file: Option<PathBuf>,
        #[arg(long = "loop")]
        loop_curve: Option<String>,
        #[arg(long)]
        imax: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Plan from C♯ to C♭ with angle certificates.
    Plan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sharp: Option<PathBuf>,
        #[arg(long)]
        flat: Option<PathBuf>,
        #[arg(long)]
        delta: Option<PathBuf>,
        #[arg(long)]
        caps: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PleatedCmd {
    /// Realize a spiralling lamination and report residuals and bends.
    Realize {
        #[command(flatten)]
        common: Common,
        /// HolonomyRep or FN coordinates (JSON); default the standard structure.
        #[arg(long)]
        rep: Option<PathBuf>,
        #[arg(long)]
        lam: Option<PathBuf>,
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// D(j) table for a Farey sequence; default rep is the 0.05 bend along a1.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rep: Option<PathBuf>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        jmin: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        jmax: Option<i64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Subcommand)]
enum SchottkyCmd {
    /// Ping-pong certificate for the subgroup generated by the given words.
    Cert {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rep: Option<PathBuf>,
        /// Comma-separated words, e.g. "a1,b1 A1 B1".
        #[arg(long)]
        gens: Option<String>,
        #[arg(long)]
        rounds: Option<usize>,
    },
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    rep: Option<PathBuf>,
    /// A measured lamination or an array of them (JSON).
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    /// Number of extra random multiloop targets drawn from the seed.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
}

fn start(common: &Common, id: &str, default: impl FnOnce() -> Result<Experiment>) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::new(default()?),
    };
    if cfg.experiment.id() != id {
        bail!("config is for {:?}, not {id:?}", cfg.experiment.id());
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn input(cfg: &mut ExperimentConfig, role: &str, p: &Path) {
    cfg.inputs.insert(role.into(), p.display().to_string());
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn build(cmd: Cmd) -> Result<ExperimentConfig> {
    let cfg = match cmd {
        Cmd::Run { config } => ExperimentConfig::load(&config)?,
        Cmd::Graft(GraftCmd::Iterate { common, fn_file, loop_curve, imax, tol }) => {
            let mut cfg = start(&common, "graft-iterate", || {
                Ok(Experiment::GraftIterate { tau: config::standard_fn(), loop_curve: "a1".into(), imax: 5, tol: 1e-9 })
            })?;
            let fn_value = match &fn_file {
                Some(p) => Some(config::read_json(p)?),
                None => None,
            };
            if let Some(p) = &fn_file {
                input(&mut cfg, "fn", p);
            }
            let Experiment::GraftIterate { tau, loop_curve: l, imax: n, tol: t } = &mut cfg.experiment else { unreachable!() };
            set(tau, fn_value);
            set(l, loop_curve);
            set(n, imax);
            set(t, tol);
            cfg
        }
        Cmd::Graft(GraftCmd::Plan { common, sharp, flat, delta, caps }) => {
            let mut cfg = start(&common, "graft-plan", || {
                let (Some(s), Some(f)) = (&sharp, &flat) else { bail!("graft plan needs --sharp and --flat (or --config)") };
                Ok(Experiment::GraftPlan { sharp: config::read_json(s)?, flat: config::read_json(f)?, delta: DeltaSchedule::uniform(0.1), caps: PlanCaps::default() })
            })?;
            for (role, p) in [("sharp", &sharp), ("flat", &flat), ("delta", &delta), ("caps", &caps)] {
                if let Some(p) = p {
                    input(&mut cfg, role, p);
                }
            }
            let Experiment::GraftPlan { sharp: s, flat: f, delta: d, caps: c } = &mut cfg.experiment else { unreachable!() };
            set(s, sharp.as_deref().map(config::read_json).transpose()?);
            set(f, flat.as_deref().map(config::read_json).transpose()?);
            set(d, delta.as_deref().map(config::read_json).transpose()?);
            set(c, caps.as_deref().map(config::read_json).transpose()?);
            cfg
        }
        Cmd::Pleated(PleatedCmd::Realize { common, rep, lam, radius, tol }) => {
            let mut cfg = start(&common, "pleated-realize", || {
                Ok(Experiment::PleatedRealize { rep: config::standard_rep(), lamination: SpiralLamination::standard(), radius: None, tol: 1e-8 })
            })?;
            for (role, p) in [("rep", &rep), ("lam", &lam)] {
                if let Some(p) = p {
                    input(&mut cfg, role, p);
                }
            }
            let Experiment::PleatedRealize { rep: r, lamination, radius: rad, tol: t } = &mut cfg.experiment else { unreachable!() };
            set(r, rep.as_deref().map(config::read_rep).transpose()?);
            set(lamination, lam.as_deref().map(config::read_json).transpose()?);
            if radius.is_some() {
                *rad = radius;
            }
            set(t, tol);
            cfg
        }
        Cmd::Pleated(PleatedCmd::Converge { common, rep, spec, jmin, jmax, tol, threads }) => {
            let mut cfg = start(&common, "pleated-converge", || {
                Ok(Experiment::PleatedConverge {
                    rep: config::bent_rep(),
                    spec: config::standard_spec(),
                    jmin: -8,
                    jmax: 12,
                    tol: 1e-2,
                    options: ConvergenceOptions::default(),
                })
            })?;
            for (role, p) in [("rep", &rep), ("spec", &spec)] {
                if let Some(p) = p {
                    input(&mut cfg, role, p);
                }
            }
            let Experiment::PleatedConverge { rep: r, spec: s, jmin: lo, jmax: hi, tol: t, options } = &mut cfg.experiment else { unreachable!() };
            set(r, rep.as_deref().map(config::read_rep).transpose()?);
            set(s, spec.as_deref().map(config::read_json).transpose()?);
            set(lo, jmin);
            set(hi, jmax);
            set(t, tol);
            set(&mut options.threads, threads);
            cfg
        }
        Cmd::Schottky(SchottkyCmd::Cert { common, rep, gens, rounds }) => {
            let mut cfg = start(&common, "schottky-cert", || {
                Ok(Experiment::SchottkyCert { rep: config::standard_rep(), gens: vec!["a1".into(), "b1 A1 B1".into()], caps: PingPongCaps::default() })
            })?;
            if let Some(p) = &rep {
                input(&mut cfg, "rep", p);
            }
            let Experiment::SchottkyCert { rep: r, gens: g, caps } = &mut cfg.experiment else { unreachable!() };
            set(r, rep.as_deref().map(config::read_rep).transpose()?);
            set(g, gens.as_deref().map(config::parse_gens));
            set(&mut caps.rounds, rounds);
            cfg
        }
        Cmd::Density(DensityArgs { common, rep, target, eps, random, threads }) => {
            let mut cfg = start(&common, "density", || {
                Ok(Experiment::Density { rep: config::standard_rep(), targets: Vec::new(), random: 20, eps: 0.05, caps: DensityCaps::default(), threads: 0 })
            })?;
            for (role, p) in [("rep", &rep), ("target", &target)] {
                if let Some(p) = p {
                    input(&mut cfg, role, p);
                }
            }
            let Experiment::Density { rep: r, targets, random: n, eps: e, threads: th, .. } = &mut cfg.experiment else { unreachable!() };
            set(r, rep.as_deref().map(config::read_rep).transpose()?);
            if let Some(p) = &target {
                *targets = config::read_targets(p)?;
                // an explicit target file replaces the random battery unless asked for
                *n = random.unwrap_or(0);
            }
            set(n, random);
            set(e, eps);
            set(th, threads);
            cfg
        }
    };
    Ok(cfg)
}

fn main() -> ExitCode {
    // usage errors exit 1; 2 is reserved for cap exhaustion
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let t0 = Instant::now();
    let res = build(cli.cmd).and_then(|cfg| {
        let run = glab::run_experiment(&cfg)?;
        let dir = glab::write_run(&run, &glab::output_root()).context("writing artifacts")?;
        Ok((run, dir))
    });
    match res {
        Ok((run, dir)) => {
            let a = &run.artifact;
            println!("{} {} {}", a.experiment, serde_json::to_value(a.status).unwrap().as_str().unwrap_or(""), dir.display());
            if let Some(e) = &a.error {
                eprintln!("note: {e}");
            }
            eprintln!("wall clock {:.3} s", t0.elapsed().as_secs_f64());
            ExitCode::from(a.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
