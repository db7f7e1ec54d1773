//! Monte Carlo check of the exact pointwise variance formulas of the
//! stochastic convolutions.

use super::Outcome;
use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, ArtifactWriter};
use anyhow::{bail, Result};
use rayon::prelude::*;
use wickwave_core::conv::{sigma_n, ConvolutionKind, PathSampler};
use wickwave_core::field::FieldPair;
use wickwave_core::noise::NoiseStream;
use wickwave_core::snapshot::export_path;
use wickwave_core::stats::variance_and_se;
use wickwave_core::LatticeSpec;

pub fn run(cfg: &ExperimentConfig, writer: &mut ArtifactWriter) -> Result<Outcome> {
    let cutoffs = match &cfg.physics.cutoffs {
        Some(c) => c.clone(),
        None => bail!("physics.cutoffs: variance-check needs a cutoff list"),
    };
    let times = cfg
        .run
        .times
        .clone()
        .unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    let noise = NoiseStream::new(cfg.run.seed);
    let members = cfg.run.members;

    let mut grid_times = vec![0.0];
    grid_times.extend(times.iter().cloned());

    let mut rows = Vec::new();
    let mut all_pass = true;
    let mut worst_z = 0.0f64;
    for &n in &cutoffs {
        let lattice = LatticeSpec::with_min_grid(n.ceil() as u32);
        let sampler = PathSampler::new(lattice, ConvolutionKind::Undamped, &grid_times)?;
        let samples: Vec<Vec<f64>> = (0..members as u64)
            .into_par_iter()
            .map(|i| {
                let path = sampler.sample(&noise.substream(i), FieldPair::zeros(lattice));
                (1..grid_times.len())
                    .map(|j| path.value_at(j, n, (0.0, 0.0)))
                    .collect()
            })
            .collect();
        if cfg.output.export_fields && n == cutoffs[0] {
            let path = sampler.sample(&noise.substream(0), FieldPair::zeros(lattice));
            export_path(&writer.dir().join("sample_path"), &path, cfg.run.seed)?;
        }
        for (j, &t) in times.iter().enumerate() {
            let values: Vec<f64> = samples.iter().map(|s| s[j]).collect();
            let (var, se) = variance_and_se(&values);
            let formula = sigma_n::<f64>(n, t);
            let z = (var - formula).abs() / se;
            worst_z = worst_z.max(z);
            all_pass &= z < 4.0;
            rows.push(vec![
                fmt_f64(n),
                fmt_f64(t),
                fmt_f64(formula),
                fmt_f64(var),
                fmt_f64(se),
                fmt_f64(z),
            ]);
        }
    }
    writer.write_table(
        "variance",
        &["N", "t", "sigma_formula", "mc_estimate", "se", "z"],
        &rows,
    )?;
    let line = format!(
        "variance-check: {} cells, M = {members}, worst |z| = {worst_z:.2} (limit 4)",
        rows.len()
    );
    Ok(if all_pass {
        Outcome::pass(vec![line])
    } else {
        Outcome::fail(vec![line])
    })
}
