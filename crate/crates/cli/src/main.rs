//! Experiment harness: one subcommand per experiment family, declarative
//! TOML configs, deterministic artifacts, and a Markdown report writer.
//!
//! Exit codes: 0 on pass, 2 when a statistical check fails, 1 on error.

mod config;
mod experiments;
mod output;
mod report;

use anyhow::Result;
use clap::{Parser, Subcommand};
use config::{Experiment, ExperimentConfig, OutputFormat};
use output::ArtifactWriter;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "wickwave",
    version,
    about = "Pseudo-spectral experiments for stochastic nonlinear waves on the 2-torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Declarative experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root random seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (overrides config and WICKWAVE_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (overrides WICKWAVE_THREADS); results are
    /// byte-identical for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Table output format.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo check of the stochastic-convolution variance formula.
    VarianceCheck,
    /// Wick-power orthogonality at stationarity.
    WickOrthogonality,
    /// Duhamel fixed-point solver: contraction scaling and manufactured
    /// solution recovery.
    LocalSolve,
    /// Long-time monitored run with the growing-cutoff schedule.
    GlobalImethodRun,
    /// Commutator-defect scaling against the cutoff.
    CommutatorScaling,
    /// Invariance of the truncated Gibbs measure under the dynamics.
    GibbsInvariance,
    /// Coupled convergence trend of the truncated Gibbs densities.
    RnConvergence,
    /// Aggregate a run directory into report.md.
    Report,
}

impl Command {
    fn experiment(&self) -> Option<Experiment> {
        match self {
            Command::VarianceCheck => Some(Experiment::VarianceCheck),
            Command::WickOrthogonality => Some(Experiment::WickOrthogonality),
            Command::LocalSolve => Some(Experiment::LocalSolve),
            Command::GlobalImethodRun => Some(Experiment::GlobalImethodRun),
            Command::CommutatorScaling => Some(Experiment::CommutatorScaling),
            Command::GibbsInvariance => Some(Experiment::GibbsInvariance),
            Command::RnConvergence => Some(Experiment::RnConvergence),
            Command::Report => None,
        }
    }
}

fn resolve_config(cli: &Cli, experiment: Experiment) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let loaded = ExperimentConfig::load(path)?;
            if loaded.experiment != experiment {
                anyhow::bail!(
                    "config is for experiment `{}`, but `{}` was requested",
                    loaded.experiment.name(),
                    experiment.name()
                );
            }
            loaded
        }
        None => ExperimentConfig::defaults(experiment),
    };
    // Precedence: flags > environment > config file > defaults.
    if let Ok(dir) = std::env::var("WICKWAVE_OUT") {
        cfg.output.dir = PathBuf::from(dir);
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn thread_count(cli: &Cli) -> Option<usize> {
    cli.threads.or_else(|| {
        std::env::var("WICKWAVE_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = thread_count(cli) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
    let Some(experiment) = cli.command.experiment() else {
        let dir = cli
            .out
            .clone()
            .or_else(|| std::env::var("WICKWAVE_OUT").ok().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        let line = report::emit_summary(&dir)?;
        println!("{line}");
        return Ok(true);
    };
    let cfg = resolve_config(cli, experiment)?;
    let mut writer = ArtifactWriter::new(&cfg)?;
    let outcome = match experiment {
        Experiment::VarianceCheck => experiments::variance_check::run(&cfg, &mut writer)?,
        Experiment::WickOrthogonality => experiments::wick_orthogonality::run(&cfg, &mut writer)?,
        Experiment::LocalSolve => experiments::local_solve::run(&cfg, &mut writer)?,
        Experiment::GlobalImethodRun => experiments::global_imethod::run(&cfg, &mut writer)?,
        Experiment::CommutatorScaling => experiments::commutator_scaling::run(&cfg, &mut writer)?,
        Experiment::GibbsInvariance => experiments::gibbs_invariance::run(&cfg, &mut writer)?,
        Experiment::RnConvergence => experiments::rn_convergence::run(&cfg, &mut writer)?,
    };
    for line in &outcome.lines {
        println!("{line}");
    }
    println!(
        "[{}] artifacts in {}",
        outcome.status(),
        cfg.output.dir.display()
    );
    writer.finish(&cfg, outcome.status())?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
