//! Spectral representation of real fields on the torus.

use crate::error::CoreError;
use crate::lattice::{Freq, LatticeSpec};
use crate::scalar::Real;
use crate::Result;
use num_complex::Complex;

/// Fourier coefficients of a real field, truncated to a square lattice.
///
/// The coefficient array is Hermitian-symmetric (coeff(−n) = conj coeff(n)),
/// which is what keeps every represented field real-valued. Constructors
/// and mutators below maintain the symmetry; `assert_hermitian` checks it.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<F: Real> {
    lattice: LatticeSpec,
    coeffs: Vec<Complex<F>>,
}

impl<F: Real> SpectralField<F> {
    /// The zero field.
    pub fn zeros(lattice: LatticeSpec) -> Self {
        SpectralField {
            lattice,
            coeffs: vec![Complex::new(F::zero(), F::zero()); lattice.num_modes()],
        }
    }

    /// Constant field u ≡ c.
    pub fn constant(lattice: LatticeSpec, c: F) -> Self {
        let mut f = Self::zeros(lattice);
        f.coeffs[lattice.index(Freq::zero())] = Complex::new(c, F::zero());
        f
    }

    /// Build from a Hermitian generator: `gen` is evaluated on the zero
    /// mode (imaginary part dropped) and on pair representatives, and is
    /// mirrored by conjugation onto −n.
    pub fn from_pair_fn(lattice: LatticeSpec, mut generator: impl FnMut(Freq) -> Complex<F>) -> Self {
        let mut f = Self::zeros(lattice);
        let z = generator(Freq::zero());
        f.coeffs[lattice.index(Freq::zero())] = Complex::new(z.re, F::zero());
        for n in lattice.representatives() {
            let c = generator(n);
            f.coeffs[lattice.index(n)] = c;
            f.coeffs[lattice.index(n.neg())] = c.conj();
        }
        f
    }

    /// Real cosine/sine mode: amp·2·Re(c·e_n) placed at ±n.
    pub fn mode(lattice: LatticeSpec, n: Freq, c: Complex<F>) -> Result<Self> {
        if !lattice.contains(n) {
            return Err(CoreError::invalid("n", "mode outside lattice"));
        }
        let mut f = Self::zeros(lattice);
        if n == Freq::zero() {
            f.coeffs[lattice.index(n)] = Complex::new(c.re, F::zero());
        } else {
            f.coeffs[lattice.index(n)] = c;
            f.coeffs[lattice.index(n.neg())] = c.conj();
        }
        Ok(f)
    }

    /// Take ownership of raw coefficients (caller guarantees symmetry).
    pub fn from_coeffs(lattice: LatticeSpec, coeffs: Vec<Complex<F>>) -> Result<Self> {
        if coeffs.len() != lattice.num_modes() {
            return Err(CoreError::LatticeMismatch(
                lattice.max_freq(),
                lattice.num_modes(),
                0,
                coeffs.len(),
            ));
        }
        Ok(SpectralField { lattice, coeffs })
    }

    #[inline]
    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex<F>] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex<F>] {
        &mut self.coeffs
    }

    /// Coefficient at n; zero outside the lattice.
    #[inline]
    pub fn coeff(&self, n: Freq) -> Complex<F> {
        if self.lattice.contains(n) {
            self.coeffs[self.lattice.index(n)]
        } else {
            Complex::new(F::zero(), F::zero())
        }
    }

    /// Set the coefficient at n and mirror the conjugate at −n.
    pub fn set_pair(&mut self, n: Freq, c: Complex<F>) {
        if n == Freq::zero() {
            self.coeffs[self.lattice.index(n)] = Complex::new(c.re, F::zero());
        } else {
            self.coeffs[self.lattice.index(n)] = c;
            self.coeffs[self.lattice.index(n.neg())] = c.conj();
        }
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> F {
        let mut worst = F::zero();
        for n in self.lattice.representatives() {
            let d = (self.coeff(n) - self.coeff(n.neg()).conj()).norm();
            if d > worst {
                worst = d;
            }
        }
        let z = self.coeff(Freq::zero()).im.abs();
        if z > worst {
            worst = z;
        }
        worst
    }

    /// In-place a ← a + s·b.
    pub fn add_scaled(&mut self, other: &Self, s: F) {
        debug_assert_eq!(self.lattice, other.lattice);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += *b * s;
        }
    }

    /// In-place scaling.
    pub fn scale(&mut self, s: F) {
        for a in &mut self.coeffs {
            *a = *a * s;
        }
    }

    /// New field a − b.
    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.lattice, other.lattice);
        let mut out = self.clone();
        out.add_scaled(other, -F::one());
        out
    }

    /// L² inner product ⟨f, g⟩ = Σ f̂(n) conj(ĝ(n)) (normalized torus
    /// measure; real because both fields are real).
    pub fn inner(&self, other: &Self) -> F {
        debug_assert_eq!(self.lattice, other.lattice);
        let mut acc = F::zero();
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            acc += a.re * b.re + a.im * b.im;
        }
        acc
    }

    /// L² norm (Σ |f̂(n)|²)^{1/2}.
    pub fn l2_norm(&self) -> F {
        self.inner(self).sqrt()
    }

    /// Restrict or extend the coefficients onto another lattice
    /// (coefficients outside the target are dropped; missing ones are 0).
    pub fn on_lattice(&self, target: LatticeSpec) -> Self {
        if target == self.lattice {
            return self.clone();
        }
        let mut out = Self::zeros(target);
        let k = self.lattice.max_freq().min(target.max_freq()) as i32;
        for n1 in -k..=k {
            for n2 in -k..=k {
                let n = Freq::new(n1, n2);
                out.coeffs[target.index(n)] = self.coeffs[self.lattice.index(n)];
            }
        }
        out
    }
}

/// Phase-space state (u, ∂ₜu) of a wave equation.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldPair<F: Real> {
    pub position: SpectralField<F>,
    pub velocity: SpectralField<F>,
}

impl<F: Real> FieldPair<F> {
    pub fn new(position: SpectralField<F>, velocity: SpectralField<F>) -> Result<Self> {
        if position.lattice() != velocity.lattice() {
            return Err(CoreError::LatticeMismatch(
                position.lattice().max_freq(),
                position.lattice().grid_size(),
                velocity.lattice().max_freq(),
                velocity.lattice().grid_size(),
            ));
        }
        Ok(FieldPair { position, velocity })
    }

    pub fn zeros(lattice: LatticeSpec) -> Self {
        FieldPair {
            position: SpectralField::zeros(lattice),
            velocity: SpectralField::zeros(lattice),
        }
    }

    #[inline]
    pub fn lattice(&self) -> LatticeSpec {
        self.position.lattice()
    }

    pub fn add_scaled(&mut self, other: &Self, s: F) {
        self.position.add_scaled(&other.position, s);
        self.velocity.add_scaled(&other.velocity, s);
    }
}
