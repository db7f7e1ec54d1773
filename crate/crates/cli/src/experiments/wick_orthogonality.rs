//! Monte Carlo check of Wick-power orthogonality at stationarity.

use super::Outcome;
use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, ArtifactWriter};
use anyhow::{bail, Result};
use rayon::prelude::*;
use wickwave_core::conv::{alpha_n, sample_free_field_pair, ConvolutionKind, PathSampler};
use wickwave_core::hermite::hermite;
use wickwave_core::noise::NoiseStream;
use wickwave_core::stats::mean_and_se;
use wickwave_core::LatticeSpec;

pub fn run(cfg: &ExperimentConfig, writer: &mut ArtifactWriter) -> Result<Outcome> {
    let cutoff = match cfg.physics.cutoff {
        Some(n) => n,
        None => bail!("physics.cutoff: wick-orthogonality needs a cutoff"),
    };
    let lattice = LatticeSpec::with_min_grid(cutoff.ceil() as u32);
    let alpha = alpha_n::<f64>(cutoff);
    let noise = NoiseStream::new(cfg.run.seed);
    let members = cfg.run.members;
    // One exact update to t = 1 so the dynamics, not just the prior
    // sampler, is exercised at stationarity.
    let sampler = PathSampler::new(lattice, ConvolutionKind::Damped, &[0.0, 1.0])?;
    let pairs: [(u32, u32); 6] = [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];

    let products: Vec<[f64; 6]> = (0..members as u64)
        .into_par_iter()
        .map(|i| {
            let stream = noise.substream(i);
            let init = sample_free_field_pair::<f64>(lattice, &stream);
            let path = sampler.sample(&stream, init);
            let z = path.value_at(1, cutoff, (0.0, 0.0));
            let h = [
                hermite(1, z, alpha),
                hermite(2, z, alpha),
                hermite(3, z, alpha),
            ];
            let mut out = [0.0f64; 6];
            for (slot, &(l, m)) in out.iter_mut().zip(&pairs) {
                *slot = h[l as usize - 1] * h[m as usize - 1];
            }
            out
        })
        .collect();

    let factorial = |k: u32| -> f64 { (1..=k).product::<u32>() as f64 };
    let mut rows = Vec::new();
    let mut all_pass = true;
    let mut worst_z = 0.0f64;
    for (idx, &(l, m)) in pairs.iter().enumerate() {
        let values: Vec<f64> = products.iter().map(|p| p[idx]).collect();
        let (mean, se) = mean_and_se(&values);
        let expected = if l == m {
            factorial(l) * alpha.powi(l as i32)
        } else {
            0.0
        };
        let z = (mean - expected).abs() / se;
        worst_z = worst_z.max(z);
        all_pass &= z < 4.0;
        rows.push(vec![
            l.to_string(),
            m.to_string(),
            fmt_f64(expected),
            fmt_f64(mean),
            fmt_f64(se),
            fmt_f64(z),
        ]);
    }
    writer.write_table(
        "wick_orthogonality",
        &["l", "m", "expected", "mc_estimate", "se", "z"],
        &rows,
    )?;
    let line = format!(
        "wick-orthogonality: N = {cutoff}, alpha = {alpha:.4}, M = {members}, worst |z| = {worst_z:.2}"
    );
    Ok(if all_pass {
        Outcome::pass(vec![line])
    } else {
        Outcome::fail(vec![line])
    })
}
