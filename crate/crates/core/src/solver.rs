//! Duhamel fixed-point local solver for the shifted equation.
//!
//! The residual field v of the first-order expansion solves
//!
//!   ∂ₜ²v (+ ∂ₜv) + (1−Δ)v + Σ_{ℓ=0}^k C(k,ℓ) Ξ_ℓ v^{k−ℓ} = 0,
//!
//! with Ξ₀ ≡ 1 and the Ξ_ℓ time-sampled forcings (Wick powers of a
//! stochastic convolution in the intended use). In mild form,
//!
//!   v(t) = hom(t) − Σ_ℓ C(k,ℓ) ∫₀ᵗ K(t−t') (Ξ_ℓ v^{k−ℓ})(t') dt',
//!
//! with K the damped or undamped wave kernel. Picard iteration of this
//! map contracts on short windows; the iteration ratio is reported so
//! experiments can measure the T^{1/2} scaling of the contraction factor.

use crate::error::CoreError;
use crate::fft::{dealias_grid_size, GridTransform};
use crate::field::{FieldPair, SpectralField};
use crate::lattice::LatticeSpec;
use crate::multiplier::{h_norm, sobolev_norm};
use crate::propagator::{damped_mode_flow, undamped_mode_flow};
use crate::scalar::Real;
use crate::wick::WickPowerSeries;
use crate::Result;

/// Binomial coefficient for the small degrees used here.
pub fn binomial(k: u32, l: u32) -> u64 {
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..l.min(k - l) {
        num *= (k - i) as u64;
        den *= (i + 1) as u64;
    }
    num / den
}

/// Initial data plus time-sampled forcings: everything the local solver
/// consumes, with its size surrogate cached.
#[derive(Clone, Debug)]
pub struct EnhancedDataSet<F: Real> {
    pub v0: SpectralField<F>,
    pub v1: SpectralField<F>,
    /// `forcings[ℓ−1][node]` for ℓ = 1..=degree; Ξ₀ ≡ 1 is implicit.
    pub forcings: Vec<Vec<SpectralField<F>>>,
    pub times: Vec<F>,
    pub degree: u32,
    /// Working-norm exponent: norms are H^{1−ε} / W^{−ε,∞}-based.
    pub eps: F,
    /// Cached size surrogate ‖(v₀,v₁)‖ + Σ_ℓ ‖Ξ_ℓ‖_{L²_t W^{−ε,∞}}.
    pub s_norm: F,
}

impl<F: Real> EnhancedDataSet<F> {
    pub fn new(
        v0: SpectralField<F>,
        v1: SpectralField<F>,
        forcings: Vec<Vec<SpectralField<F>>>,
        times: Vec<F>,
        degree: u32,
        eps: F,
    ) -> Result<Self> {
        if degree < 3 || degree % 2 == 0 {
            return Err(CoreError::invalid("degree", "must be an odd integer >= 3"));
        }
        if forcings.len() != degree as usize {
            return Err(CoreError::invalid(
                "forcings",
                format!("need {} forcing sequences, got {}", degree, forcings.len()),
            ));
        }
        for seq in &forcings {
            if seq.len() != times.len() {
                return Err(CoreError::invalid(
                    "forcings",
                    "every forcing must be sampled on the data set's time grid",
                ));
            }
        }
        if times.is_empty() || times[0] != F::zero() {
            return Err(CoreError::BadTimeGrid);
        }
        let mut data = EnhancedDataSet {
            v0,
            v1,
            forcings,
            times,
            degree,
            eps,
            s_norm: F::zero(),
        };
        data.s_norm = data.compute_size()?;
        Ok(data)
    }

    /// Build from a Wick power series (ℓ-th forcing = :Z^ℓ:).
    pub fn from_wick(
        v0: SpectralField<F>,
        v1: SpectralField<F>,
        series: &WickPowerSeries<F>,
        eps: F,
    ) -> Result<Self> {
        let degree = series.max_degree;
        let mut forcings: Vec<Vec<SpectralField<F>>> =
            (0..degree).map(|_| Vec::new()).collect();
        for t in 0..series.times.len() {
            for (l, f) in series.at(t).iter().enumerate() {
                forcings[l].push(f.clone());
            }
        }
        EnhancedDataSet::new(v0, v1, forcings, series.times.clone(), degree, eps)
    }

    fn compute_size(&self) -> Result<F> {
        let one_minus = F::one() - self.eps;
        let mut total = h_norm(&self.v0, one_minus) + h_norm(&self.v1, -self.eps);
        for seq in &self.forcings {
            // L² in time of the W^{−ε,∞} norm, trapezoid on the grid.
            let sups: Vec<F> = seq
                .iter()
                .map(|f| sobolev_norm(f, -self.eps, F::infinity()))
                .collect::<Result<_>>()?;
            let mut acc = F::zero();
            for (j, w) in self.times.windows(2).enumerate() {
                let dt = w[1] - w[0];
                acc += F::of(0.5) * dt * (sups[j] * sups[j] + sups[j + 1] * sups[j + 1]);
            }
            total += acc.sqrt();
        }
        Ok(total)
    }
}

/// How the iteration starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PicardStart {
    #[default]
    Zero,
    /// Homogeneous linear evolution of the initial data.
    Linear,
}

/// Tunables of the fixed-point solve.
#[derive(Clone, Copy, Debug)]
pub struct SolverConfig<F: Real> {
    pub dt: F,
    pub window: F,
    pub fixed_point_tol: F,
    pub max_picard_iters: usize,
    pub dealias: bool,
    pub start: PicardStart,
}

impl<F: Real> SolverConfig<F> {
    pub fn new(dt: F, window: F, fixed_point_tol: F, max_picard_iters: usize) -> Self {
        SolverConfig {
            dt,
            window,
            fixed_point_tol,
            max_picard_iters,
            dealias: true,
            start: PicardStart::Zero,
        }
    }
}

/// Fixed point trajectory plus convergence telemetry.
#[derive(Clone, Debug)]
pub struct PicardSolution<F: Real> {
    pub times: Vec<F>,
    pub states: Vec<FieldPair<F>>,
    /// Successive-difference ratios, one per iteration after the first.
    pub ratios: Vec<F>,
    /// Finite-difference Lipschitz estimate of the Duhamel map at the
    /// fixed point, probed along a constant unit field.
    pub lipschitz: F,
    pub iterations: usize,
    pub converged: bool,
    pub final_diff: F,
}

impl<F: Real> PicardSolution<F> {
    /// The reported contraction factor: the Lipschitz estimate at the
    /// fixed point (the successive-difference ratios of a Volterra-type
    /// map decay with the iteration index, so they under-report it).
    pub fn contraction_factor(&self) -> F {
        self.lipschitz
    }
}

/// Σ_{ℓ=0}^k C(k,ℓ)·Ξ_ℓ·v^{k−ℓ} evaluated pointwise from pre-transformed
/// forcing grids, truncated back to `lattice`.
fn nonlinearity_from_grids<F: Real>(
    plan: &GridTransform<F>,
    v: &SpectralField<F>,
    forcing_grids: &[Vec<F>],
    degree: u32,
    lattice: LatticeSpec,
) -> SpectralField<F> {
    let v_grid = plan.to_grid(v);
    let mut acc = vec![F::zero(); v_grid.len()];
    // Forcing of top degree ℓ = k multiplies v⁰.
    for (a, x) in acc.iter_mut().zip(&forcing_grids[degree as usize - 1]) {
        *a = *x;
    }
    let mut power = vec![F::one(); v_grid.len()];
    for m in 1..=degree {
        for (p, v) in power.iter_mut().zip(&v_grid) {
            *p = *p * *v;
        }
        let l = degree - m;
        let coeff = F::of(binomial(degree, l) as f64);
        if l == 0 {
            for (a, p) in acc.iter_mut().zip(&power) {
                *a += *p;
            }
        } else {
            let xi = &forcing_grids[l as usize - 1];
            for ((a, p), x) in acc.iter_mut().zip(&power).zip(xi) {
                *a += coeff * *p * *x;
            }
        }
    }
    plan.from_grid(&acc, lattice)
}

/// The renormalized nonlinearity Σ_ℓ C(k,ℓ)Ξ_ℓ v^{k−ℓ} for a single state.
pub fn renormalized_nonlinearity<F: Real>(
    v: &SpectralField<F>,
    forcings: &[SpectralField<F>],
    degree: u32,
    grid: usize,
) -> SpectralField<F> {
    let plan = GridTransform::new(grid);
    let forcing_grids: Vec<Vec<F>> = forcings.iter().map(|f| plan.to_grid(f)).collect();
    nonlinearity_from_grids(&plan, v, &forcing_grids, degree, v.lattice())
}

/// Composite quadrature weights for ∫₀^{t_i} on a uniform grid: Simpson
/// where the interval count is even, Simpson + 3/8 tail when odd,
/// trapezoid for a single interval.
fn quadrature_weights<F: Real>(intervals: usize, dt: F) -> Vec<F> {
    let mut w = vec![F::zero(); intervals + 1];
    let third = dt / F::of(3.0);
    match intervals {
        0 => {}
        1 => {
            w[0] = dt * F::of(0.5);
            w[1] = dt * F::of(0.5);
        }
        _ => {
            let simpson_end = if intervals % 2 == 0 {
                intervals
            } else {
                intervals - 3
            };
            if simpson_end > 0 {
                w[0] += third;
                w[simpson_end] += third;
                for j in 1..simpson_end {
                    w[j] += if j % 2 == 1 {
                        F::of(4.0) * third
                    } else {
                        F::of(2.0) * third
                    };
                }
            }
            if simpson_end < intervals {
                // 3/8 rule on the last three intervals.
                let c = dt * F::of(3.0 / 8.0);
                w[simpson_end] += c;
                w[simpson_end + 1] += c * F::of(3.0);
                w[simpson_end + 2] += c * F::of(3.0);
                w[simpson_end + 3] += c;
            }
        }
    }
    w
}

struct KernelTables<F> {
    /// `pos[lag][mode]`: position response to a velocity impulse.
    pos: Vec<Vec<F>>,
    /// `vel[lag][mode]`: velocity response.
    vel: Vec<Vec<F>>,
}

fn kernel_tables<F: Real>(lattice: LatticeSpec, dt: F, lags: usize, damped: bool) -> KernelTables<F> {
    let mut pos = Vec::with_capacity(lags);
    let mut vel = Vec::with_capacity(lags);
    for m in 0..lags {
        let t = dt * F::of(m as f64);
        let mut p = Vec::with_capacity(lattice.num_modes());
        let mut v = Vec::with_capacity(lattice.num_modes());
        for n in lattice.modes() {
            let flow = if damped {
                damped_mode_flow(n.bessel_sq::<F>(), t)
            } else {
                undamped_mode_flow(n.bessel::<F>(), t)
            };
            p.push(flow.b);
            v.push(flow.d);
        }
        pos.push(p);
        vel.push(v);
    }
    KernelTables { pos, vel }
}

/// Solve the shifted equation on [0, window] by Picard iteration of the
/// Duhamel map with composite Simpson quadrature.
///
/// Returns a no-contraction error when `max_picard_iters` is exhausted
/// while the difference ratio is ≥ 1 — the signal that the window is too
/// large for the data (halve it and retry, mirroring the local theory's
/// T = T(‖Ξ‖)).
pub fn picard_solve<F: Real>(
    data: &EnhancedDataSet<F>,
    damped: bool,
    cfg: &SolverConfig<F>,
) -> Result<PicardSolution<F>> {
    let lattice = data.v0.lattice();
    // Node times: the data grid truncated to the window; spacing must
    // match cfg.dt.
    let mut n_nodes = 0;
    let tol_t = cfg.dt * F::of(1e-9);
    for (j, &t) in data.times.iter().enumerate() {
        let expected = cfg.dt * F::of(j as f64);
        if (t - expected).abs() > tol_t {
            return Err(CoreError::invalid(
                "dt",
                "solver step must match the forcing sampling interval",
            ));
        }
        if t <= cfg.window + tol_t {
            n_nodes = j + 1;
        }
    }
    if n_nodes < 2 {
        return Err(CoreError::invalid(
            "window",
            "window shorter than one time step",
        ));
    }

    let grid = if cfg.dealias {
        dealias_grid_size(lattice.max_freq(), data.degree)
    } else {
        lattice.grid_size()
    };
    let plan = GridTransform::new(grid);
    let forcing_grids: Vec<Vec<Vec<F>>> = (0..n_nodes)
        .map(|j| {
            data.forcings
                .iter()
                .map(|seq| plan.to_grid(&seq[j]))
                .collect()
        })
        .collect();

    let kernels = kernel_tables(lattice, cfg.dt, n_nodes, damped);

    // Homogeneous evolution of the data.
    let init = FieldPair::new(data.v0.clone(), data.v1.clone())?;
    let hom: Vec<FieldPair<F>> = (0..n_nodes)
        .map(|j| {
            let t = cfg.dt * F::of(j as f64);
            if damped {
                crate::propagator::flow_damped(&init, t)
            } else {
                Ok(crate::propagator::flow_undamped(&init, t))
            }
        })
        .collect::<Result<_>>()?;

    let weights: Vec<Vec<F>> = (0..n_nodes).map(|i| quadrature_weights(i, cfg.dt)).collect();

    let one_minus = F::one() - data.eps;
    let mut current: Vec<SpectralField<F>> = match cfg.start {
        PicardStart::Zero => (0..n_nodes).map(|_| SpectralField::zeros(lattice)).collect(),
        PicardStart::Linear => hom.iter().map(|p| p.position.clone()).collect(),
    };

    let mut ratios: Vec<F> = Vec::new();
    let mut last_diff: Option<F> = None;
    let mut converged = false;
    let mut final_diff = F::infinity();
    let mut iterations = 0;

    for iter in 0..cfg.max_picard_iters {
        iterations = iter + 1;
        // Nonlinearity at every node for the current iterate.
        let g: Vec<SpectralField<F>> = (0..n_nodes)
            .map(|j| {
                nonlinearity_from_grids(&plan, &current[j], &forcing_grids[j], data.degree, lattice)
            })
            .collect();
        // Γ(v) at every node.
        let mut next: Vec<SpectralField<F>> = Vec::with_capacity(n_nodes);
        for i in 0..n_nodes {
            let mut acc = hom[i].position.clone();
            for j in 0..=i {
                let w = weights[i][j];
                if w == F::zero() {
                    continue;
                }
                let ker = &kernels.pos[i - j][..];
                let gj = g[j].coeffs();
                let out = acc.coeffs_mut();
                for (idx, k) in ker.iter().enumerate() {
                    out[idx] -= gj[idx] * (*k * w);
                }
            }
            next.push(acc);
        }

        let mut diff = F::zero();
        for (a, b) in next.iter().zip(&current) {
            diff = diff.max(h_norm(&a.sub(b), one_minus));
        }
        if let Some(prev) = last_diff {
            if prev > F::zero() {
                ratios.push(diff / prev);
            }
        }
        last_diff = Some(diff);
        current = next;
        final_diff = diff;
        if !diff.is_finite() {
            // Diverged outright: the window is far too large.
            return Err(CoreError::NoContraction {
                iterations,
                ratio: f64::INFINITY,
            });
        }
        if diff < cfg.fixed_point_tol {
            converged = true;
            break;
        }
    }

    if !converged {
        let last_ratio = ratios.last().copied().unwrap_or(F::infinity());
        if !(last_ratio < F::one()) {
            return Err(CoreError::NoContraction {
                iterations,
                ratio: last_ratio.to64(),
            });
        }
    }

    // Velocity component of the fixed point via the differentiated map.
    let g: Vec<SpectralField<F>> = (0..n_nodes)
        .map(|j| nonlinearity_from_grids(&plan, &current[j], &forcing_grids[j], data.degree, lattice))
        .collect();

    // Lipschitz probe: ‖Γ(v* + εw) − Γ(v*)‖ / ε along w ≡ 1.
    let eps_probe = F::of(1e-3);
    let lipschitz = {
        let mut worst = F::zero();
        let delta_g: Vec<SpectralField<F>> = (0..n_nodes)
            .map(|j| {
                let mut shifted = current[j].clone();
                shifted.coeffs_mut()[lattice.index(crate::lattice::Freq::zero())] +=
                    num_complex::Complex::new(eps_probe, F::zero());
                nonlinearity_from_grids(&plan, &shifted, &forcing_grids[j], data.degree, lattice)
                    .sub(&g[j])
            })
            .collect();
        for i in 1..n_nodes {
            let mut acc = SpectralField::zeros(lattice);
            for j in 0..=i {
                let w = weights[i][j];
                if w == F::zero() {
                    continue;
                }
                let ker = &kernels.pos[i - j][..];
                let dj = delta_g[j].coeffs();
                let out = acc.coeffs_mut();
                for (idx, k) in ker.iter().enumerate() {
                    out[idx] -= dj[idx] * (*k * w);
                }
            }
            worst = worst.max(h_norm(&acc, one_minus));
        }
        worst / eps_probe
    };

    let mut states = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let mut vel = hom[i].velocity.clone();
        for j in 0..=i {
            let w = weights[i][j];
            if w == F::zero() {
                continue;
            }
            let ker = &kernels.vel[i - j][..];
            let gj = g[j].coeffs();
            let out = vel.coeffs_mut();
            for (idx, k) in ker.iter().enumerate() {
                out[idx] -= gj[idx] * (*k * w);
            }
        }
        states.push(FieldPair::new(current[i].clone(), vel)?);
    }

    Ok(PicardSolution {
        times: (0..n_nodes).map(|j| cfg.dt * F::of(j as f64)).collect(),
        states,
        ratios,
        lipschitz,
        iterations,
        converged,
        final_diff,
    })
}
