//! Closed-form linear flows of the (damped) Klein-Gordon operator.
//!
//! Every mode n evolves under ẍ + ⟨n⟩²x = 0 (undamped) or
//! ẍ + ẋ + ⟨n⟩²x = 0 (damped). Both fundamental matrices and the Gaussian
//! increment covariances of the stochastically forced versions admit
//! closed forms, so time stepping of the linear parts is exact. Because
//! ⟨n⟩² ≥ 1 > 1/4, the damped modes are always underdamped.

use crate::error::CoreError;
use crate::field::{FieldPair, SpectralField};
use crate::lattice::Freq;
use crate::multiplier::apply_multiplier_unchecked;
use crate::scalar::Real;
use crate::Result;

/// Row-major 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<F> {
    pub a: F,
    pub b: F,
    pub c: F,
    pub d: F,
}

impl<F: Real> Mat2<F> {
    #[inline]
    pub fn mul_vec(&self, x: F, y: F) -> (F, F) {
        (self.a * x + self.b * y, self.c * x + self.d * y)
    }

    #[inline]
    pub fn mul_mat(&self, o: &Mat2<F>) -> Mat2<F> {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// M X Mᵀ for symmetric X (returns symmetric result).
    pub fn congruence(&self, x: &Sym2<F>) -> Sym2<F> {
        let (p, q, r) = (x.xx, x.xy, x.yy);
        Sym2 {
            xx: self.a * (self.a * p + self.b * q) + self.b * (self.a * q + self.b * r),
            xy: self.c * (self.a * p + self.b * q) + self.d * (self.a * q + self.b * r),
            yy: self.c * (self.c * p + self.d * q) + self.d * (self.c * q + self.d * r),
        }
    }
}

/// Symmetric 2×2 matrix (covariance).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sym2<F> {
    pub xx: F,
    pub xy: F,
    pub yy: F,
}

impl<F: Real> Sym2<F> {
    pub fn zero() -> Self {
        Sym2 {
            xx: F::zero(),
            xy: F::zero(),
            yy: F::zero(),
        }
    }

    pub fn scale(&self, s: F) -> Self {
        Sym2 {
            xx: self.xx * s,
            xy: self.xy * s,
            yy: self.yy * s,
        }
    }

    pub fn add(&self, o: &Sym2<F>) -> Self {
        Sym2 {
            xx: self.xx + o.xx,
            xy: self.xy + o.xy,
            yy: self.yy + o.yy,
        }
    }

    /// Lower-triangular Cholesky factor with a small diagonal floor that
    /// absorbs rounding at tiny steps.
    pub fn cholesky(&self, floor: F) -> Mat2<F> {
        let l11 = self.xx.max(floor).sqrt();
        let l21 = if l11 > F::zero() {
            self.xy / l11
        } else {
            F::zero()
        };
        let l22 = (self.yy - l21 * l21).max(floor).sqrt();
        Mat2 {
            a: l11,
            b: F::zero(),
            c: l21,
            d: l22,
        }
    }
}

/// Fundamental matrix of ẍ + ω²x = 0 over time t.
pub fn undamped_mode_flow<F: Real>(omega: F, t: F) -> Mat2<F> {
    let (s, c) = (omega * t).sin_cos();
    Mat2 {
        a: c,
        b: s / omega,
        c: -omega * s,
        d: c,
    }
}

/// Fundamental matrix of ẍ + ẋ + ω²x = 0 over time t ≥ 0 (ω² = ⟨n⟩² ≥ 1).
pub fn damped_mode_flow<F: Real>(omega_sq: F, t: F) -> Mat2<F> {
    let quarter = F::of(0.25);
    let nu = (omega_sq - quarter).sqrt();
    let (s, c) = (nu * t).sin_cos();
    let e = (-t * F::of(0.5)).exp();
    let s_over = s / nu;
    Mat2 {
        a: e * (c + s_over * F::of(0.5)),
        b: e * s_over,
        c: -e * omega_sq * s_over,
        d: e * (c - s_over * F::of(0.5)),
    }
}

/// Covariance of the Gaussian increment accumulated over a step of size h
/// by ẍ + ω²x = ξ̇ with noise of intensity `c` on the velocity component.
pub fn undamped_increment_cov<F: Real>(omega: F, h: F, c: F) -> Sym2<F> {
    let two = F::of(2.0);
    let four = F::of(4.0);
    let s2 = (two * omega * h).sin();
    let sh = (omega * h).sin();
    Sym2 {
        xx: c * (h / two - s2 / (four * omega)) / (omega * omega),
        xy: c * sh * sh / (two * omega * omega),
        yy: c * (h / two + s2 / (four * omega)),
    }
}

/// Covariance of the Gaussian increment over a step of size h for
/// ẍ + ẋ + ω²x = ξ̇ with noise intensity `c` on the velocity component.
/// Uses the antiderivatives of e^{−s}cos(bs), e^{−s}sin(bs) with b = 2ν.
pub fn damped_increment_cov<F: Real>(omega_sq: F, h: F, c: F) -> Sym2<F> {
    let quarter = F::of(0.25);
    let half = F::of(0.5);
    let two = F::of(2.0);
    let nu = (omega_sq - quarter).sqrt();
    let b = two * nu;
    let eh = (-h).exp();
    let (sb, cb) = (b * h).sin_cos();
    let denom = F::one() + b * b;
    let ic = (F::one() - eh * (cb - b * sb)) / denom;
    let is = (b - eh * (sb + b * cb)) / denom;
    let decay = F::one() - eh;
    let nu2 = nu * nu;
    let xx = (decay - ic) / (two * nu2);
    let xy = is / (two * nu) - (decay - ic) / (two * two * nu2);
    let yy = (decay + ic) * half - is / (two * nu) + (decay - ic) / (F::of(8.0) * nu2);
    Sym2 {
        xx: c * xx,
        xy: c * xy,
        yy: c * yy,
    }
}

/// Stationary covariance of the damped stochastic mode with intensity `c`:
/// diag(c/(2ω²), c/2).
pub fn damped_stationary_cov<F: Real>(omega_sq: F, c: F) -> Sym2<F> {
    let half = F::of(0.5);
    Sym2 {
        xx: half * c / omega_sq,
        xy: F::zero(),
        yy: half * c,
    }
}

/// Wave propagator multiplier S(t): n ↦ sin(t⟨n⟩)/⟨n⟩.
pub fn wave_kernel<F: Real>(t: F) -> impl Fn(Freq) -> F {
    move |n| {
        let w = n.bessel::<F>();
        (t * w).sin() / w
    }
}

/// Time derivative ∂ₜS(t): n ↦ cos(t⟨n⟩).
pub fn wave_kernel_dot<F: Real>(t: F) -> impl Fn(Freq) -> F {
    move |n| (t * n.bessel::<F>()).cos()
}

/// Damped wave propagator multiplier: n ↦ e^{−t/2} sin(tν)/ν with
/// ν = (3/4 + |n|²)^{1/2}. Rejects t < 0.
pub fn damped_kernel<F: Real>(t: F) -> Result<impl Fn(Freq) -> F> {
    if t < F::zero() {
        return Err(CoreError::invalid(
            "t",
            "damped propagator is defined for t >= 0",
        ));
    }
    Ok(move |n: Freq| {
        let nu = (n.bessel_sq::<F>() - F::of(0.25)).sqrt();
        (-t * F::of(0.5)).exp() * (t * nu).sin() / nu
    })
}

/// Derivative multiplier ∂ₜ𝒟(t): n ↦ e^{−t/2}(cos(tν) − sin(tν)/(2ν)).
pub fn damped_kernel_dot<F: Real>(t: F) -> Result<impl Fn(Freq) -> F> {
    if t < F::zero() {
        return Err(CoreError::invalid(
            "t",
            "damped propagator is defined for t >= 0",
        ));
    }
    Ok(move |n: Freq| {
        let nu = (n.bessel_sq::<F>() - F::of(0.25)).sqrt();
        let (s, c) = (t * nu).sin_cos();
        (-t * F::of(0.5)).exp() * (c - s / (F::of(2.0) * nu))
    })
}

fn apply_mode_flow<F: Real>(
    pair: &FieldPair<F>,
    flow: impl Fn(Freq) -> Mat2<F>,
) -> FieldPair<F> {
    let lattice = pair.lattice();
    let mut pos = SpectralField::zeros(lattice);
    let mut vel = SpectralField::zeros(lattice);
    for n in lattice.modes() {
        let idx = lattice.index(n);
        let m = flow(n);
        let p = pair.position.coeffs()[idx];
        let v = pair.velocity.coeffs()[idx];
        pos.coeffs_mut()[idx] = p * m.a + v * m.b;
        vel.coeffs_mut()[idx] = p * m.c + v * m.d;
    }
    FieldPair {
        position: pos,
        velocity: vel,
    }
}

/// Exact homogeneous flow of ∂ₜ²u + (1−Δ)u = 0 over time t.
pub fn flow_undamped<F: Real>(pair: &FieldPair<F>, t: F) -> FieldPair<F> {
    apply_mode_flow(pair, |n| undamped_mode_flow(n.bessel::<F>(), t))
}

/// Exact homogeneous flow of ∂ₜ²u + ∂ₜu + (1−Δ)u = 0 over time t ≥ 0.
pub fn flow_damped<F: Real>(pair: &FieldPair<F>, t: F) -> Result<FieldPair<F>> {
    if t < F::zero() {
        return Err(CoreError::invalid("t", "damped flow requires t >= 0"));
    }
    Ok(apply_mode_flow(pair, |n| damped_mode_flow(n.bessel_sq::<F>(), t)))
}

/// S(t) applied to a field.
pub fn apply_wave_kernel<F: Real>(f: &SpectralField<F>, t: F) -> SpectralField<F> {
    apply_multiplier_unchecked(f, wave_kernel(t))
}
