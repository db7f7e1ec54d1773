//! Renormalized (Wick) powers of truncated Gaussian fields.
//!
//! The Wick power :Z_N^ℓ: is H_ℓ(Z_N(x); σ) evaluated pointwise with the
//! field's variance parameter — σ_N(t) for the undamped convolution,
//! α_N for the damped one. Evaluation happens on a dealiased collocation
//! grid and is truncated back to the lattice, which is exact because
//! H_ℓ is a degree-ℓ polynomial.

use crate::conv::StochasticConvolutionPath;
use crate::fft::hermite_family;
use crate::field::SpectralField;
use crate::lattice::LatticeSpec;
use crate::multiplier::project_low;
use crate::scalar::Real;
use crate::Result;

/// Time series of Wick powers :Z_N^ℓ:, ℓ = 1..=max_degree.
#[derive(Clone, Debug)]
pub struct WickPowerSeries<F: Real> {
    pub lattice: LatticeSpec,
    /// Ball radius N of the truncation the powers renormalize.
    pub cutoff: f64,
    pub times: Vec<F>,
    pub variance: Vec<F>,
    pub max_degree: u32,
    /// `powers[time_index][degree - 1]`.
    pub powers: Vec<Vec<SpectralField<F>>>,
}

impl<F: Real> WickPowerSeries<F> {
    /// All-zero forcings on the given time grid (useful for homogeneous
    /// runs and tests).
    pub fn zeros(lattice: LatticeSpec, times: &[F], max_degree: u32) -> Self {
        let powers = times
            .iter()
            .map(|_| {
                (1..=max_degree)
                    .map(|_| SpectralField::zeros(lattice))
                    .collect()
            })
            .collect();
        WickPowerSeries {
            lattice,
            cutoff: lattice.ball_radius(),
            times: times.to_vec(),
            variance: vec![F::zero(); times.len()],
            max_degree,
            powers,
        }
    }

    /// The Wick powers at one time, indexed by degree − 1.
    #[inline]
    pub fn at(&self, time_index: usize) -> &[SpectralField<F>] {
        &self.powers[time_index]
    }

    /// The sub-series covering entries `from..=to`.
    pub fn slice(&self, from: usize, to: usize) -> Self {
        WickPowerSeries {
            lattice: self.lattice,
            cutoff: self.cutoff,
            times: self.times[from..=to].to_vec(),
            variance: self.variance[from..=to].to_vec(),
            max_degree: self.max_degree,
            powers: self.powers[from..=to].to_vec(),
        }
    }

    /// Every `stride`-th entry (same realization on a coarser grid);
    /// used to drive runs at several step sizes with one sampled path.
    pub fn subsample(&self, stride: usize) -> Self {
        assert!(stride >= 1);
        WickPowerSeries {
            lattice: self.lattice,
            cutoff: self.cutoff,
            times: self.times.iter().step_by(stride).cloned().collect(),
            variance: self.variance.iter().step_by(stride).cloned().collect(),
            max_degree: self.max_degree,
            powers: self
                .powers
                .iter()
                .step_by(stride)
                .cloned()
                .collect(),
        }
    }
}

/// Wick powers of a single truncated field: H_ℓ(P_N u; σ) for ℓ = 1..=k.
pub fn wick_powers_of_field<F: Real>(
    u: &SpectralField<F>,
    cutoff: f64,
    k: u32,
    sigma: F,
    grid_override: Option<usize>,
) -> Result<Vec<SpectralField<F>>> {
    let truncated = project_low(u, cutoff);
    hermite_family(&truncated, k, sigma, grid_override)
}

/// Wick powers along a stochastic convolution path, degree 1..=k.
///
/// Each state is projected onto the ball {|n| ≤ N} that the stored
/// variance parameter refers to (N = lattice radius), then Hermite
/// transforms are taken with that time's variance.
pub fn wick_powers<F: Real>(
    path: &StochasticConvolutionPath<F>,
    k: u32,
    grid_override: Option<usize>,
) -> Result<WickPowerSeries<F>> {
    let cutoff = path.lattice.ball_radius();
    let mut powers = Vec::with_capacity(path.times.len());
    for (state, &sigma) in path.states.iter().zip(&path.variance) {
        powers.push(wick_powers_of_field(
            &state.position,
            cutoff,
            k,
            sigma,
            grid_override,
        )?);
    }
    Ok(WickPowerSeries {
        lattice: path.lattice,
        cutoff,
        times: path.times.clone(),
        variance: path.variance.clone(),
        max_degree: k,
        powers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::{alpha_n, sample_damped, sample_free_field_pair, DampedInit};
    use crate::lattice::Freq;
    use crate::noise::NoiseStream;
    use crate::stats::mean_and_se;

    #[test]
    fn degree_one_is_the_truncated_field() {
        let lattice = LatticeSpec::with_min_grid(3);
        let noise = NoiseStream::new(1);
        let pair = sample_free_field_pair::<f64>(lattice, &noise);
        let powers = wick_powers_of_field(&pair.position, 3.0, 3, 1.7, None).unwrap();
        let truncated = project_low(&pair.position, 3.0);
        for (a, b) in powers[0].coeffs().iter().zip(truncated.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_variance_reduces_to_plain_powers() {
        let lattice = LatticeSpec::with_min_grid(2);
        let noise = NoiseStream::new(2);
        let u = sample_free_field_pair::<f64>(lattice, &noise).position;
        let wick = wick_powers_of_field(&u, 2.0, 3, 0.0, None).unwrap();
        let plain = crate::fft::pointwise_power(&project_low(&u, 2.0), 3, lattice).unwrap();
        for (a, b) in wick[2].coeffs().iter().zip(plain.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn capacity_error_when_grid_pinned_too_small() {
        let lattice = LatticeSpec::with_min_grid(4);
        let noise = NoiseStream::new(3);
        let u = sample_free_field_pair::<f64>(lattice, &noise).position;
        let err = wick_powers_of_field(&u, 4.0, 3, 1.0, Some(lattice.grid_size())).unwrap_err();
        assert!(matches!(err, crate::CoreError::DealiasCapacity { .. }));
    }

    #[test]
    fn wick_powers_are_real_fields() {
        let lattice = LatticeSpec::with_min_grid(3);
        let noise = NoiseStream::new(4);
        let times = [0.0, 0.5];
        let path = sample_damped::<f64>(
            lattice,
            &times,
            &noise,
            DampedInit::FromEquilibrium,
        )
        .unwrap();
        let series = wick_powers(&path, 3, None).unwrap();
        for t in 0..times.len() {
            for p in series.at(t) {
                assert!(p.hermitian_defect() < 1e-10);
            }
        }
    }

    #[test]
    fn stationary_wick_square_has_zero_spatial_mean() {
        // E[H₂(Φ_N(x); α_N)] = 0: Monte Carlo on the spatial average.
        let lattice = LatticeSpec::with_min_grid(2);
        let noise = NoiseStream::new(9);
        let m = 2000;
        let mut samples = Vec::with_capacity(m);
        for i in 0..m {
            let pair = sample_free_field_pair::<f64>(lattice, &noise.substream(i as u64));
            let powers =
                wick_powers_of_field(&pair.position, 2.0, 2, alpha_n(2.0), None).unwrap();
            samples.push(powers[1].coeff(Freq::zero()).re);
        }
        let (mean, se) = mean_and_se(&samples);
        assert!(mean.abs() < 4.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn wick_orthogonality_at_a_point() {
        // E[:Φ_N^ℓ::Φ_N^m:](x) = δ_{ℓm} ℓ! α_N^ℓ, brute-force Gaussian
        // moment oracle via Monte Carlo at x = 0.
        let lattice = LatticeSpec::with_min_grid(2);
        let cutoff = 2.0;
        let alpha = alpha_n::<f64>(cutoff);
        let noise = NoiseStream::new(31);
        let m = 30_000;
        let mut prods: Vec<Vec<f64>> = vec![Vec::with_capacity(m); 4];
        for i in 0..m {
            let pair = sample_free_field_pair::<f64>(lattice, &noise.substream(i as u64));
            let z = crate::conv::field_value_at(&pair.position, cutoff, (0.0, 0.0));
            let h1 = z;
            let h2 = crate::hermite::hermite(2, z, alpha);
            let h3 = crate::hermite::hermite(3, z, alpha);
            prods[0].push(h1 * h2);
            prods[1].push(h2 * h3);
            prods[2].push(h2 * h2);
            prods[3].push(h3 * h3);
        }
        let checks = [
            (0usize, 0.0),
            (1, 0.0),
            (2, 2.0 * alpha * alpha),
            (3, 6.0 * alpha * alpha * alpha),
        ];
        for (idx, expected) in checks {
            let (mean, se) = mean_and_se(&prods[idx]);
            assert!(
                (mean - expected).abs() < 4.0 * se,
                "pair {idx}: {mean} vs {expected} (se {se})"
            );
        }
    }
}
