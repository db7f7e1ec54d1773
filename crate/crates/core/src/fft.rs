//! Collocation transforms and exactly dealiased pointwise algebra.
//!
//! Pointwise products of band-limited fields are evaluated on zero-padded
//! grids large enough that every retained output mode is alias-free, then
//! truncated back to spectral coefficients. A degree-k product of fields
//! with max frequency K is computed on ⌈(k+1)/2⌉·(2K+1) points per axis
//! (rounded up to a 5-smooth FFT size), which is exact.

use crate::error::CoreError;
use crate::field::SpectralField;
use crate::hermite::hermite_through;
use crate::lattice::LatticeSpec;
use crate::scalar::Real;
use crate::Result;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Smallest 5-smooth integer ≥ n (fast FFT sizes).
pub fn next_smooth(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2usize, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Padded grid size for exact degree-`degree` products at max frequency K.
pub fn dealias_grid_size(max_freq: u32, degree: u32) -> usize {
    let k = max_freq as usize;
    let per_axis = (degree as usize + 1).div_ceil(2) * (2 * k + 1);
    next_smooth(per_axis.max(2 * k + 2))
}

/// Whether `grid` points per axis suffice for alias-free degree-`degree`
/// products of K-band-limited fields (output truncated back to K).
pub fn grid_can_dealias(grid: usize, max_freq: u32, degree: u32) -> bool {
    grid >= (degree as usize + 1) * max_freq as usize + 1
}

/// Planned 2-d transform of a fixed square size.
pub struct GridTransform<F: Real> {
    size: usize,
    forward: Arc<dyn Fft<F>>,
    inverse: Arc<dyn Fft<F>>,
}

impl<F: Real> GridTransform<F> {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        GridTransform {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    fn transpose(src: &[Complex<F>], dst: &mut [Complex<F>], m: usize) {
        for i in 0..m {
            for j in 0..m {
                dst[j * m + i] = src[i * m + j];
            }
        }
    }

    fn fft2(&self, buf: &mut Vec<Complex<F>>, fft: &Arc<dyn Fft<F>>) {
        let m = self.size;
        fft.process(buf);
        let mut tmp = vec![Complex::new(F::zero(), F::zero()); m * m];
        Self::transpose(buf, &mut tmp, m);
        fft.process(&mut tmp);
        Self::transpose(&tmp, buf, m);
    }

    /// Complex grid samples u(x_{i1,i2}) = Σ û(n) e^{i n·x}, x = 2π·i/M.
    pub fn to_grid_complex(&self, f: &SpectralField<F>) -> Vec<Complex<F>> {
        let m = self.size;
        let k = f.lattice().max_freq() as i32;
        assert!(
            m >= 2 * k as usize + 1,
            "grid {} too small for max frequency {}",
            m,
            k
        );
        let mut buf = vec![Complex::new(F::zero(), F::zero()); m * m];
        let wrap = |n: i32| -> usize { n.rem_euclid(m as i32) as usize };
        for n in f.lattice().modes() {
            let c = f.coeff(n);
            if c.re != F::zero() || c.im != F::zero() {
                buf[wrap(n.n1) * m + wrap(n.n2)] = c;
            }
        }
        self.fft2(&mut buf, &self.inverse);
        buf
    }

    /// Real grid samples of a Hermitian-symmetric field.
    pub fn to_grid(&self, f: &SpectralField<F>) -> Vec<F> {
        self.to_grid_complex(f).iter().map(|z| z.re).collect()
    }

    /// Project real grid samples onto the retained modes of `lattice`.
    ///
    /// Exact for band-limited data when the grid dealiases the sampled
    /// function relative to `lattice` (see [`grid_can_dealias`]).
    pub fn from_grid(&self, values: &[F], lattice: LatticeSpec) -> SpectralField<F> {
        let m = self.size;
        assert_eq!(values.len(), m * m);
        let mut buf: Vec<Complex<F>> = values
            .iter()
            .map(|&v| Complex::new(v, F::zero()))
            .collect();
        self.fft2(&mut buf, &self.forward);
        let scale = F::one() / F::of((m * m) as f64);
        let wrap = |n: i32| -> usize { n.rem_euclid(m as i32) as usize };
        let mut out = SpectralField::zeros(lattice);
        for n in lattice.modes() {
            let c = buf[wrap(n.n1) * m + wrap(n.n2)] * scale;
            out.coeffs_mut()[lattice.index(n)] = c;
        }
        out
    }
}

fn common_lattice<F: Real>(factors: &[&SpectralField<F>]) -> Result<LatticeSpec> {
    let lattice = factors
        .first()
        .ok_or_else(|| CoreError::invalid("factors", "empty product"))?
        .lattice();
    for f in factors {
        if f.lattice() != lattice {
            return Err(CoreError::LatticeMismatch(
                lattice.max_freq(),
                lattice.grid_size(),
                f.lattice().max_freq(),
                f.lattice().grid_size(),
            ));
        }
    }
    Ok(lattice)
}

/// Exact pointwise product of band-limited fields, truncated to `out`.
///
/// The internal grid is sized so that every mode of `out` is alias-free:
/// M ≥ deg·K_in + K_out + 1.
pub fn pointwise_product<F: Real>(
    factors: &[&SpectralField<F>],
    out: LatticeSpec,
) -> Result<SpectralField<F>> {
    let lattice = common_lattice(factors)?;
    let deg = factors.len();
    let needed = deg * lattice.max_freq() as usize + out.max_freq() as usize + 1;
    let m = next_smooth(needed);
    let plan = GridTransform::new(m);
    let mut grid = plan.to_grid(factors[0]);
    for f in &factors[1..] {
        let g = plan.to_grid(f);
        for (a, b) in grid.iter_mut().zip(&g) {
            *a = *a * *b;
        }
    }
    Ok(plan.from_grid(&grid, out))
}

/// Exact k-th pointwise power, truncated to `out`.
pub fn pointwise_power<F: Real>(
    f: &SpectralField<F>,
    k: u32,
    out: LatticeSpec,
) -> Result<SpectralField<F>> {
    if k == 0 {
        return Ok(SpectralField::constant(out, F::one()));
    }
    let factors: Vec<&SpectralField<F>> = std::iter::repeat(f).take(k as usize).collect();
    pointwise_product(&factors, out)
}

/// Hermite transforms H_ℓ(f(x); σ) for ℓ = 1..=max_degree, evaluated on a
/// shared dealiased grid and truncated back to the field's lattice.
pub fn hermite_family<F: Real>(
    f: &SpectralField<F>,
    max_degree: u32,
    sigma: F,
    grid_override: Option<usize>,
) -> Result<Vec<SpectralField<F>>> {
    let lattice = f.lattice();
    let auto = dealias_grid_size(lattice.max_freq(), max_degree);
    let m = match grid_override {
        Some(g) => {
            if !grid_can_dealias(g, lattice.max_freq(), max_degree) {
                return Err(CoreError::DealiasCapacity {
                    degree: max_degree,
                    max_freq: lattice.max_freq(),
                    have: g,
                    needed: (max_degree as usize + 1) * lattice.max_freq() as usize + 1,
                });
            }
            g
        }
        None => auto,
    };
    let plan = GridTransform::new(m);
    let grid = plan.to_grid(f);
    let mut values = vec![F::zero(); max_degree as usize + 1];
    let mut grids: Vec<Vec<F>> = vec![vec![F::zero(); m * m]; max_degree as usize];
    for (i, &x) in grid.iter().enumerate() {
        hermite_through(max_degree, x, sigma, &mut values);
        for l in 1..=max_degree as usize {
            grids[l - 1][i] = values[l];
        }
    }
    Ok(grids
        .into_iter()
        .map(|g| plan.from_grid(&g, lattice))
        .collect())
}
