//! Coupled Monte Carlo convergence trend of the truncated Gibbs densities.

use super::Outcome;
use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, ArtifactWriter};
use anyhow::{bail, Result};
use wickwave_core::gibbs::rn_convergence;
use wickwave_core::noise::NoiseStream;

pub fn run(cfg: &ExperimentConfig, writer: &mut ArtifactWriter) -> Result<Outcome> {
    let cutoffs = match &cfg.physics.cutoffs {
        Some(c) => c.clone(),
        None => bail!("physics.cutoffs: rn-convergence needs a cutoff list"),
    };
    let noise = NoiseStream::new(cfg.run.seed);
    let rows = rn_convergence::<f64>(cfg.physics.degree, &cutoffs, cfg.run.members, &noise)?;

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.n_low),
                fmt_f64(r.n_high),
                fmt_f64(r.mean_abs_diff),
                fmt_f64(r.se_abs),
                fmt_f64(r.median_abs_diff),
                fmt_f64(r.mean_sq_diff),
                fmt_f64(r.se_sq),
            ]
        })
        .collect();
    writer.write_table(
        "rn_convergence",
        &[
            "N",
            "N_next",
            "mean_abs_diff",
            "se_abs",
            "median_abs_diff",
            "mean_sq_diff",
            "se_sq",
        ],
        &table,
    )?;

    // Cauchy trend, "within MC error": fail only on a statistically
    // significant increase of the successive differences. The density
    // differences are heavy-tailed, so pairs whose standard error rivals
    // the mean are inconclusive rather than evidence either way.
    let mut ok = true;
    let mut conclusive = 0usize;
    for w in rows.windows(2) {
        let combined = (w[0].se_abs.powi(2) + w[1].se_abs.powi(2)).sqrt();
        if w[1].mean_abs_diff > w[0].mean_abs_diff + 2.0 * combined {
            ok = false;
        }
        if combined < 0.5 * w[0].mean_abs_diff.max(w[1].mean_abs_diff) {
            conclusive += 1;
        }
    }
    let line = format!(
        "rn-convergence: M = {}, successive |R_N' − R_N| medians: {:?}, means: {:?} ({}; {}/{} pairs conclusive at this sample size)",
        cfg.run.members,
        rows.iter()
            .map(|r| (r.median_abs_diff * 1e4).round() / 1e4)
            .collect::<Vec<_>>(),
        rows.iter()
            .map(|r| (r.mean_abs_diff * 1e4).round() / 1e4)
            .collect::<Vec<_>>(),
        if ok {
            "no significant increase"
        } else {
            "SIGNIFICANT increase"
        },
        conclusive,
        rows.len().saturating_sub(1),
    );
    Ok(if ok {
        Outcome::pass(vec![line])
    } else {
        Outcome::fail(vec![line])
    })
}
