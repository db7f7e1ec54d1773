//! Contraction-scaling and manufactured-solution checks of the Duhamel
//! fixed-point solver.

use super::Outcome;
use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, ArtifactWriter};
use anyhow::Result;
use num_complex::Complex;
use serde::Serialize;
use wickwave_core::field::SpectralField;
use wickwave_core::lattice::Freq;
use wickwave_core::multiplier::{apply_multiplier_unchecked, h_norm};
use wickwave_core::noise::NoiseStream;
use wickwave_core::solver::{picard_solve, EnhancedDataSet, SolverConfig};
use wickwave_core::stats::fit_line;

#[derive(Serialize)]
struct LocalSolveSummary {
    windows: Vec<f64>,
    mean_factors: Vec<f64>,
    contraction_slope: f64,
    slope_target: f64,
    manufactured_error: f64,
    draws: usize,
}

pub fn run(cfg: &ExperimentConfig, writer: &mut ArtifactWriter) -> Result<Outcome> {
    let lattice = cfg.lattice()?;
    let windows = cfg
        .run
        .times
        .clone()
        .unwrap_or_else(|| vec![0.05, 0.1, 0.2]);
    let draws = cfg.run.members.max(1) as u64;
    let eps = cfg.physics.eps;

    // Near-resonant single-mode forcing with unit L²-in-time mass per
    // window: the worst-case probe of the Duhamel kernel.
    let k_max = lattice.max_freq() as i32;
    let n_star = Freq::new((3 * k_max) / 4, 0);
    let omega = n_star.bessel::<f64>();
    let mut rows = Vec::new();
    let mut mean_factors = vec![0.0f64; windows.len()];
    let mut all_converged = true;
    for draw in 0..draws {
        let noise = NoiseStream::new(cfg.run.seed.wrapping_add(draw));
        for (wi, &t_end) in windows.iter().enumerate() {
            let dt = t_end / 16.0;
            let times: Vec<f64> = (0..=16).map(|j| j as f64 * dt).collect();
            let amp = t_end.powf(-0.5);
            let forcings: Vec<Vec<SpectralField<f64>>> = (0..cfg.physics.degree)
                .map(|l| {
                    let z = noise.normals2(n_star.stream_tag(), l as u64);
                    let base = SpectralField::mode(
                        lattice,
                        n_star,
                        Complex::new(z[0] * 0.5, z[1] * 0.5),
                    )
                    .expect("mode inside lattice");
                    times
                        .iter()
                        .map(|&t| {
                            let mut f = SpectralField::zeros(lattice);
                            f.add_scaled(&base, amp * (omega * t).cos());
                            f
                        })
                        .collect()
                })
                .collect();
            let data = EnhancedDataSet::new(
                SpectralField::constant(lattice, 1e-4),
                SpectralField::zeros(lattice),
                forcings,
                times,
                cfg.physics.degree,
                eps,
            )?;
            let solver_cfg = SolverConfig::new(dt, t_end, 1e-12, 40);
            let sol = picard_solve(&data, cfg.physics.damped, &solver_cfg)?;
            all_converged &= sol.converged;
            let factor = sol.contraction_factor();
            mean_factors[wi] += factor / draws as f64;
            rows.push(vec![
                draw.to_string(),
                fmt_f64(t_end),
                fmt_f64(factor),
                sol.iterations.to_string(),
                sol.converged.to_string(),
            ]);
        }
    }
    writer.write_table(
        "contraction",
        &["draw", "window", "factor", "iterations", "converged"],
        &rows,
    )?;
    let lx: Vec<f64> = windows.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = mean_factors.iter().map(|f| f.ln()).collect();
    let slope = fit_line(&lx, &ly)?.slope;

    let manufactured_error = manufactured_solution_error(cfg)?;

    let summary = LocalSolveSummary {
        windows: windows.clone(),
        mean_factors,
        contraction_slope: slope,
        slope_target: 0.5,
        manufactured_error,
        draws: draws as usize,
    };
    writer.write_json("local_solve.json", &summary)?;

    let passed =
        all_converged && (slope - 0.5).abs() <= 0.2 && manufactured_error < 1e-6;
    let line = format!(
        "local-solve: contraction slope {slope:.3} (target 0.5 ± 0.2), manufactured error {manufactured_error:.2e}, converged = {all_converged}"
    );
    Ok(if passed {
        Outcome::pass(vec![line])
    } else {
        Outcome::fail(vec![line])
    })
}

fn manufactured_solution_error(cfg: &ExperimentConfig) -> Result<f64> {
    let lattice = cfg.lattice()?;
    let phi = {
        let mut f = SpectralField::<f64>::zeros(lattice);
        f.set_pair(Freq::new(1, 0), Complex::new(0.31, 0.0));
        f.set_pair(Freq::new(0, 2), Complex::new(0.12, -0.05));
        f
    };
    let amp = |t: f64| 0.4 + 0.2 * (1.7 * t).sin();
    let amp_dot = |t: f64| 0.2 * 1.7 * (1.7 * t).cos();
    let amp_ddot = |t: f64| -0.2 * 1.7 * 1.7 * (1.7 * t).sin();
    let dt = 0.0125;
    let nodes = 17;
    let times: Vec<f64> = (0..nodes).map(|j| j as f64 * dt).collect();
    let degree = cfg.physics.degree;
    let phi_pow = wickwave_core::fft::pointwise_power(&phi, degree, lattice)?;
    let klein = apply_multiplier_unchecked(&phi, |n| n.bessel_sq::<f64>());
    let damping = if cfg.physics.damped { 1.0 } else { 0.0 };
    let mut xi3 = Vec::with_capacity(nodes);
    for &t in &times {
        let mut f = SpectralField::zeros(lattice);
        f.add_scaled(&phi, -(amp_ddot(t) + damping * amp_dot(t)));
        f.add_scaled(&klein, -amp(t));
        f.add_scaled(&phi_pow, -amp(t).powi(degree as i32));
        xi3.push(f);
    }
    let mut forcings: Vec<Vec<SpectralField<f64>>> = (0..cfg.physics.degree - 1)
        .map(|_| (0..nodes).map(|_| SpectralField::zeros(lattice)).collect())
        .collect();
    forcings.push(xi3);
    let mut v0 = SpectralField::zeros(lattice);
    v0.add_scaled(&phi, amp(0.0));
    let mut v1 = SpectralField::zeros(lattice);
    v1.add_scaled(&phi, amp_dot(0.0));
    let data = EnhancedDataSet::new(v0, v1, forcings, times.clone(), cfg.physics.degree, cfg.physics.eps)?;
    let sol = picard_solve(
        &data,
        cfg.physics.damped,
        &SolverConfig::new(dt, times[nodes - 1], 1e-10, 40),
    )?;
    let mut worst = 0.0f64;
    for (j, s) in sol.states.iter().enumerate() {
        let mut expected = SpectralField::zeros(lattice);
        expected.add_scaled(&phi, amp(times[j]));
        worst = worst.max(h_norm(&s.position.sub(&expected), 1.0 - cfg.physics.eps));
    }
    Ok(worst)
}
