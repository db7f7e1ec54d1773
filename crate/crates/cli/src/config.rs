//! Declarative experiment configuration: one human-editable TOML file per
//! experiment, every default echoed explicitly into the run manifest.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VarianceCheck,
    WickOrthogonality,
    LocalSolve,
    GlobalImethodRun,
    CommutatorScaling,
    GibbsInvariance,
    RnConvergence,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::VarianceCheck => "variance-check",
            Experiment::WickOrthogonality => "wick-orthogonality",
            Experiment::LocalSolve => "local-solve",
            Experiment::GlobalImethodRun => "global-imethod-run",
            Experiment::CommutatorScaling => "commutator-scaling",
            Experiment::GibbsInvariance => "gibbs-invariance",
            Experiment::RnConvergence => "rn-convergence",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub max_freq: u32,
    /// Collocation points per axis; default 2K+2.
    pub grid_size: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    /// Nonlinearity degree k (odd).
    pub degree: u32,
    pub damped: bool,
    /// Regularity s of the smoothing multiplier.
    pub s: f64,
    /// Working-norm exponent ε.
    pub eps: f64,
    /// Single cutoff N where the experiment uses one.
    pub cutoff: Option<f64>,
    /// Cutoff list where the experiment scans several.
    pub cutoffs: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub sigma: f64,
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
    pub stages: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t_end: f64,
    pub dt: f64,
    /// Ensemble size / sample count.
    pub members: usize,
    pub seed: u64,
    /// Observation times where the experiment samples a path.
    pub times: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: OutputFormat,
    /// Write field snapshots every this many nodes (0 = never).
    pub snapshot_stride: usize,
    /// Export sampled ensembles / example paths in the binary format.
    pub export_fields: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub lattice: LatticeConfig,
    pub physics: PhysicsConfig,
    pub schedule: Option<ScheduleConfig>,
    pub run: RunConfig,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    /// Built-in defaults per experiment (desk-scale, minutes not hours).
    pub fn defaults(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            lattice: LatticeConfig {
                max_freq: 16,
                grid_size: None,
            },
            physics: PhysicsConfig {
                degree: 3,
                damped: true,
                s: 0.9,
                eps: 0.1,
                cutoff: None,
                cutoffs: None,
            },
            schedule: None,
            run: RunConfig {
                t_end: 1.0,
                dt: 0.01,
                members: 2000,
                seed: 7,
                times: None,
            },
            output: OutputConfig {
                dir: PathBuf::from("out"),
                format: OutputFormat::Csv,
                snapshot_stride: 0,
                export_fields: false,
            },
        };
        match experiment {
            Experiment::VarianceCheck => ExperimentConfig {
                physics: PhysicsConfig {
                    cutoffs: Some(vec![4.0, 16.0]),
                    ..base.physics
                },
                run: RunConfig {
                    times: Some(vec![0.5, 1.0, 2.0]),
                    ..base.run
                },
                ..base
            },
            Experiment::WickOrthogonality => ExperimentConfig {
                lattice: LatticeConfig {
                    max_freq: 8,
                    grid_size: None,
                },
                physics: PhysicsConfig {
                    cutoff: Some(8.0),
                    ..base.physics
                },
                run: RunConfig {
                    members: 20_000,
                    ..base.run
                },
                ..base
            },
            Experiment::LocalSolve => ExperimentConfig {
                lattice: LatticeConfig {
                    max_freq: 32,
                    grid_size: None,
                },
                run: RunConfig {
                    times: Some(vec![0.05, 0.1, 0.2]),
                    members: 8,
                    ..base.run
                },
                ..base
            },
            Experiment::GlobalImethodRun => ExperimentConfig {
                lattice: LatticeConfig {
                    max_freq: 32,
                    grid_size: None,
                },
                physics: PhysicsConfig {
                    damped: false,
                    ..base.physics
                },
                schedule: Some(ScheduleConfig {
                    sigma: 1.2,
                    tau: 0.5,
                    alpha: 0.65,
                    beta: 0.25,
                    stages: 5,
                }),
                run: RunConfig {
                    t_end: 2.5,
                    ..base.run
                },
                ..base
            },
            Experiment::CommutatorScaling => ExperimentConfig {
                lattice: LatticeConfig {
                    max_freq: 128,
                    grid_size: None,
                },
                physics: PhysicsConfig {
                    s: 0.85,
                    cutoffs: Some(vec![8.0, 16.0, 32.0, 64.0]),
                    ..base.physics
                },
                run: RunConfig {
                    members: 20,
                    ..base.run
                },
                ..base
            },
            Experiment::GibbsInvariance => ExperimentConfig {
                lattice: LatticeConfig {
                    max_freq: 1,
                    grid_size: None,
                },
                physics: PhysicsConfig {
                    cutoff: Some(1.0),
                    ..base.physics
                },
                run: RunConfig {
                    t_end: 5.0,
                    dt: 0.02,
                    members: 4000,
                    ..base.run
                },
                ..base
            },
            Experiment::RnConvergence => ExperimentConfig {
                physics: PhysicsConfig {
                    cutoffs: Some(vec![2.0, 4.0, 8.0, 16.0]),
                    ..base.physics
                },
                run: RunConfig {
                    members: 1000,
                    ..base.run
                },
                ..base
            },
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Field-level validation; rules that encode the admissible parameter
    /// ranges of the underlying theory are enforced here.
    pub fn validate(&self) -> Result<()> {
        if self.run.members == 0 {
            bail!("run.members: M must be positive");
        }
        if !(self.run.dt > 0.0) {
            bail!("run.dt: step must be positive");
        }
        if !(self.run.t_end >= 0.0) {
            bail!("run.t_end: horizon must be nonnegative");
        }
        let k = self.physics.degree;
        if k < 3 || k % 2 == 0 {
            bail!("physics.degree: k must be an odd integer >= 3");
        }
        let eps_max = 1.0 / (2.0 * (k as f64 - 1.0));
        if !(self.physics.eps >= 0.0 && self.physics.eps < eps_max) {
            bail!(
                "physics.eps: must satisfy 0 <= eps < 1/(2(k-1)) = {eps_max} for degree k = {k}, got {}",
                self.physics.eps
            );
        }
        if !(self.physics.s > 0.0 && self.physics.s <= 1.0) {
            bail!("physics.s: must lie in (0, 1]");
        }
        if self.experiment == Experiment::GlobalImethodRun {
            if !(self.physics.s > 0.8) {
                bail!(
                    "physics.s: the global energy-monitoring run requires s > 4/5, got {}",
                    self.physics.s
                );
            }
            if self.schedule.is_none() {
                bail!("schedule: global-imethod-run needs a [schedule] section");
            }
        }
        if let Some(sched) = &self.schedule {
            if !(sched.sigma > 1.0) {
                bail!("schedule.sigma: growth factor must exceed 1");
            }
            if !(sched.tau > 0.0) {
                bail!("schedule.tau: stage length must be positive");
            }
        }
        if let Some(times) = &self.run.times {
            if times.is_empty() {
                bail!("run.times: must not be empty when given");
            }
            for w in times.windows(2) {
                if !(w[1] > w[0]) {
                    bail!("run.times: must be strictly increasing");
                }
            }
        }
        if let Some(cutoffs) = &self.physics.cutoffs {
            if cutoffs.is_empty() {
                bail!("physics.cutoffs: must not be empty when given");
            }
            for w in cutoffs.windows(2) {
                if !(w[1] > w[0]) {
                    bail!("physics.cutoffs: must be strictly increasing");
                }
            }
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<wickwave_core::LatticeSpec> {
        let spec = match self.lattice.grid_size {
            Some(g) => wickwave_core::LatticeSpec::new(self.lattice.max_freq, g)?,
            None => wickwave_core::LatticeSpec::with_min_grid(self.lattice.max_freq),
        };
        Ok(spec)
    }
}
