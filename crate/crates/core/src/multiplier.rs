//! Fourier multipliers, sharp projections, the smoothing operator used
//! for energy monitoring, and Sobolev norms.

use crate::error::CoreError;
use crate::fft::GridTransform;
use crate::field::SpectralField;
use crate::lattice::Freq;
use crate::scalar::Real;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Apply a real, even multiplier: coeff'(n) = m(n)·coeff(n).
///
/// Rejects non-even multipliers (m(−n) ≠ m(n)), which would break the
/// Hermitian symmetry of real fields.
pub fn apply_multiplier<F: Real>(
    f: &SpectralField<F>,
    m: impl Fn(Freq) -> F,
) -> Result<SpectralField<F>> {
    for n in f.lattice().representatives() {
        if m(n) != m(n.neg()) {
            return Err(CoreError::NonEvenMultiplier {
                n1: n.n1,
                n2: n.n2,
                mn1: -n.n1,
                mn2: -n.n2,
            });
        }
    }
    Ok(apply_multiplier_unchecked(f, m))
}

/// Same as [`apply_multiplier`] without the evenness scan; for multipliers
/// that are radial by construction.
pub fn apply_multiplier_unchecked<F: Real>(
    f: &SpectralField<F>,
    m: impl Fn(Freq) -> F,
) -> SpectralField<F> {
    let lattice = f.lattice();
    let mut out = f.clone();
    for n in lattice.modes() {
        let idx = lattice.index(n);
        let w = m(n);
        out.coeffs_mut()[idx] = f.coeffs()[idx] * w;
    }
    out
}

/// Sharp frequency cutoff onto {|n| ≤ N} (Euclidean ball, inclusive).
pub fn project_low<F: Real>(f: &SpectralField<F>, cutoff: f64) -> SpectralField<F> {
    apply_multiplier_unchecked(f, |n| {
        if n.in_ball(cutoff) {
            F::one()
        } else {
            F::zero()
        }
    })
}

/// Complementary projection onto {|n| > N}; `project_low + project_high = id`.
pub fn project_high<F: Real>(f: &SpectralField<F>, cutoff: f64) -> SpectralField<F> {
    apply_multiplier_unchecked(f, |n| {
        if n.in_ball(cutoff) {
            F::zero()
        } else {
            F::one()
        }
    })
}

/// Interpolation rule used on the transition band N < |ξ| < 2N.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum MultiplierProfile {
    /// (N/|ξ|)^{(1−s)·w(t)} with w the smoothstep 3t²−2t³ in t = log₂(|ξ|/N);
    /// C¹, monotone, matches both endpoint pieces.
    #[default]
    Smoothstep,
    /// (N/|ξ|)^{1−s} continued down to |ξ| = N; C⁰ and monotone.
    PowerLaw,
}

/// Specification of the smoothing multiplier m_N: identity up to N,
/// fractional integration of order 1−s beyond 2N.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IOperatorSpec<F: Real> {
    cutoff: F,
    s: F,
    profile: MultiplierProfile,
}

impl<F: Real> IOperatorSpec<F> {
    pub fn new(cutoff: F, s: F, profile: MultiplierProfile) -> Result<Self> {
        if !(cutoff > F::zero()) {
            return Err(CoreError::invalid("cutoff", "must be positive"));
        }
        if !(s > F::zero() && s <= F::one()) {
            return Err(CoreError::invalid("s", "must lie in (0, 1]"));
        }
        Ok(IOperatorSpec { cutoff, s, profile })
    }

    #[inline]
    pub fn cutoff(&self) -> F {
        self.cutoff
    }

    #[inline]
    pub fn regularity(&self) -> F {
        self.s
    }

    #[inline]
    pub fn profile(&self) -> MultiplierProfile {
        self.profile
    }

    /// The multiplier value m_N(n) ∈ [0, 1]; radial and non-increasing.
    pub fn multiplier(&self, n: Freq) -> F {
        let r = F::of((n.norm_sq() as f64).sqrt());
        let big_n = self.cutoff;
        if r <= big_n {
            return F::one();
        }
        let one_minus_s = F::one() - self.s;
        let ratio = big_n / r;
        if r >= F::of(2.0) * big_n {
            return ratio.powf(one_minus_s);
        }
        let w = match self.profile {
            MultiplierProfile::PowerLaw => F::one(),
            MultiplierProfile::Smoothstep => {
                let t = (r / big_n).ln() / F::LN_2();
                t * t * (F::of(3.0) - F::of(2.0) * t)
            }
        };
        ratio.powf(one_minus_s * w)
    }

    /// Apply the smoothing operator to a field.
    pub fn apply(&self, f: &SpectralField<F>) -> SpectralField<F> {
        apply_multiplier_unchecked(f, |n| self.multiplier(n))
    }
}

/// Sobolev norm ‖⟨∇⟩^s f‖_{L^p} with the normalized torus measure.
///
/// For p = 2 this is the exact Parseval sum (Σ ⟨n⟩^{2s}|f̂(n)|²)^{1/2};
/// for finite p ≠ 2 it is the collocation-grid quadrature of |⟨∇⟩^s f|^p
/// (spectrally exact for band-limited integrands when p is an even
/// integer); p = ∞ gives the grid sup norm. Rejects p < 1.
pub fn sobolev_norm<F: Real>(f: &SpectralField<F>, s: F, p: F) -> Result<F> {
    if p < F::one() {
        return Err(CoreError::invalid("p", "Lebesgue exponent must be >= 1"));
    }
    if p == F::of(2.0) {
        let mut acc = F::zero();
        for n in f.lattice().modes() {
            let w = n.bessel_sq::<F>().powf(s);
            acc += w * f.coeff(n).norm_sqr();
        }
        return Ok(acc.sqrt());
    }
    let weighted = apply_multiplier_unchecked(f, |n| n.bessel::<F>().powf(s));
    let plan = GridTransform::new(f.lattice().grid_size());
    let values = plan.to_grid(&weighted);
    if p == F::infinity() {
        return Ok(values
            .iter()
            .fold(F::zero(), |acc, v| acc.max(v.abs())));
    }
    let mut acc = F::zero();
    for v in &values {
        acc += v.abs().powf(p);
    }
    let mean = acc / F::of(values.len() as f64);
    Ok(mean.powf(F::one() / p))
}

/// H^s norm shorthand (p = 2).
pub fn h_norm<F: Real>(f: &SpectralField<F>, s: F) -> F {
    sobolev_norm(f, s, F::of(2.0)).expect("p = 2 is always valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use num_complex::Complex;

    fn random_field(k: u32, seed: u64) -> SpectralField<f64> {
        let lattice = LatticeSpec::with_min_grid(k);
        let mut state = seed;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / (1u64 << 53) as f64 - 0.5
        };
        SpectralField::from_pair_fn(lattice, |_| Complex::new(next(), next()))
    }

    #[test]
    fn identity_multiplier_is_identity() {
        let f = random_field(4, 1);
        let g = apply_multiplier(&f, |_| 1.0).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn multiplier_composition() {
        let f = random_field(4, 2);
        let once = apply_multiplier(&f, |n| n.bessel_sq::<f64>().powf(-2.0)).unwrap();
        let twice = apply_multiplier(
            &apply_multiplier(&f, |n| n.bessel_sq::<f64>().powf(-1.0)).unwrap(),
            |n| n.bessel_sq::<f64>().powf(-1.0),
        )
        .unwrap();
        for (a, b) in once.coeffs().iter().zip(twice.coeffs()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn odd_multiplier_rejected() {
        let f = random_field(2, 3);
        let err = apply_multiplier(&f, |n| n.n1 as f64).unwrap_err();
        assert!(matches!(err, CoreError::NonEvenMultiplier { .. }));
    }

    #[test]
    fn projections_partition_and_are_orthogonal() {
        let f = random_field(5, 4);
        let low = project_low(&f, 2.5);
        let high = project_high(&f, 2.5);
        for (i, c) in f.coeffs().iter().enumerate() {
            let sum = low.coeffs()[i] + high.coeffs()[i];
            assert_eq!(*c, sum);
        }
        assert_eq!(low.inner(&high), 0.0);
        // Idempotent.
        assert_eq!(project_low(&low, 2.5), low);
    }

    #[test]
    fn projection_edge_cases() {
        let f = random_field(2, 5);
        let only_zero = project_low(&f, 0.0);
        for n in f.lattice().modes() {
            if n != Freq::zero() {
                assert_eq!(only_zero.coeff(n).norm(), 0.0);
            }
        }
        let single = SpectralField::mode(
            f.lattice(),
            Freq::new(2, 0),
            Complex::new(1.0, 0.0),
        )
        .unwrap();
        assert_eq!(project_low(&single, 1.0).l2_norm(), 0.0);
    }

    #[test]
    fn smoothing_multiplier_endpoints() {
        let spec = IOperatorSpec::new(4.0, 0.5, MultiplierProfile::Smoothstep).unwrap();
        assert_eq!(spec.multiplier(Freq::new(3, 0)), 1.0);
        assert_eq!(spec.multiplier(Freq::new(4, 0)), 1.0);
        // |n| = 2N: (1/2)^{1/2}.
        let m = spec.multiplier(Freq::new(8, 0));
        assert!((m - 0.5f64.sqrt()).abs() < 1e-12);
        // s = 1 flattens the high-frequency piece to 1.
        let flat = IOperatorSpec::new(4.0, 1.0, MultiplierProfile::Smoothstep).unwrap();
        assert_eq!(flat.multiplier(Freq::new(20, 3)), 1.0);
    }

    #[test]
    fn smoothing_multiplier_monotone_in_radius() {
        for profile in [MultiplierProfile::Smoothstep, MultiplierProfile::PowerLaw] {
            let spec = IOperatorSpec::new(6.0, 0.85, profile).unwrap();
            let mut last = 1.0f64;
            for r in 1..60 {
                let m = spec.multiplier(Freq::new(r, 0));
                assert!(m <= last + 1e-15, "profile {profile:?} not monotone at {r}");
                assert!((0.0..=1.0).contains(&m));
                last = m;
            }
        }
    }

    #[test]
    fn sobolev_norm_constants_and_cosine() {
        let lattice = LatticeSpec::with_min_grid(3);
        let c = SpectralField::constant(lattice, -2.5);
        for &(s, p) in &[(0.0, 2.0), (1.0, 2.0), (0.7, 4.0), (2.0, f64::INFINITY)] {
            assert!((sobolev_norm(&c, s, p).unwrap() - 2.5).abs() < 1e-12);
        }
        // f = cos(x₁): coeff(±(1,0)) = 1/2, ⟨(1,0)⟩² = 2, H¹ norm = 1.
        let f = SpectralField::<f64>::mode(lattice, Freq::new(1, 0), Complex::new(0.5, 0.0)).unwrap();
        assert!((h_norm(&f, 1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_small_p() {
        let f = random_field(2, 8);
        assert!(sobolev_norm(&f, 0.0, 0.5).is_err());
    }

    #[test]
    fn smoothing_sandwich_with_explicit_constants() {
        // ‖f‖_{H^s} ≤ ‖I_N f‖_{H¹} and ‖I_N f‖_{H¹} ≤ √2·N^{1−s}‖f‖_{H^s},
        // uniformly over N ∈ {8,16,32,64}; mode-wise bound with C₁ = 1,
        // C₂ = √2.
        let s = 0.7;
        for seed in 0..25u64 {
            let f = random_field(16, 100 + seed);
            for &n in &[8.0f64, 16.0, 32.0, 64.0] {
                let spec = IOperatorSpec::new(n, s, MultiplierProfile::Smoothstep).unwrap();
                let smoothed = spec.apply(&f);
                let hs = h_norm(&f, s);
                let h1 = h_norm(&smoothed, 1.0);
                assert!(hs <= h1 + 1e-12, "N={n}: {hs} > {h1}");
                assert!(
                    h1 <= 2f64.sqrt() * n.powf(1.0 - s) * hs + 1e-12,
                    "N={n}: {h1} vs {}",
                    2f64.sqrt() * n.powf(1.0 - s) * hs
                );
            }
        }
    }
}
