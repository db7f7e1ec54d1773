//! Pseudo-spectral simulation and verification kernels for stochastic
//! (damped) nonlinear wave equations on the 2-torus.
//!
//! The crate is organized around a single field representation —
//! Hermitian-symmetric Fourier coefficients of a real field on the
//! period-2π torus — and builds on it:
//!
//! * [`lattice`], [`field`], [`fft`]: the frequency lattice, spectral
//!   fields, and exact (dealiased) collocation transforms;
//! * [`multiplier`]: Fourier multipliers, sharp frequency projections,
//!   the smoothing operator used for energy monitoring, Sobolev norms;
//! * [`hermite`], [`wick`]: Hermite polynomials with a variance
//!   parameter and renormalized (Wick) powers of Gaussian fields;
//! * [`noise`], [`conv`]: counter-based Gaussian streams and exact
//!   per-mode sampling of the stochastic convolutions of the wave and
//!   damped wave equations;
//! * [`propagator`], [`solver`], [`stepper`]: closed-form linear flows,
//!   the Duhamel/Picard local solver, and Strang-splitting long-time
//!   integrators (including the truncated damped dynamics driven by
//!   Ornstein-Uhlenbeck velocity updates);
//! * [`energy`], [`imethod`]: modified-energy reports, energy-increment
//!   decomposition, commutator-defect measurements, cutoff schedules and
//!   growth-bound fits;
//! * [`gibbs`]: truncated Gibbs densities, exact samplers, and
//!   statistical invariance tests;
//! * [`stats`], [`snapshot`]: small statistics helpers (two-sample
//!   Kolmogorov-Smirnov, slope fits) and the binary field snapshot
//!   format.
//!
//! All numerics are generic over the scalar type through [`scalar::Real`]
//! (`f32` or `f64`); concrete `f64` aliases are exported at the crate
//! root, and `f64` is what the command-line harness uses.

pub mod conv;
pub mod energy;
pub mod error;
pub mod fft;
pub mod field;
pub mod gibbs;
pub mod hermite;
pub mod imethod;
pub mod lattice;
pub mod multiplier;
pub mod noise;
pub mod propagator;
pub mod scalar;
pub mod snapshot;
pub mod solver;
pub mod stats;
pub mod stepper;
pub mod wick;

pub use error::CoreError;
pub use lattice::{Freq, LatticeSpec};
pub use scalar::Real;

/// Crate-level result type.
pub type Result<T> = std::result::Result<T, CoreError>;

/// Spectral field with `f64` coefficients (the default working type).
pub type Field64 = field::SpectralField<f64>;
/// Spectral field with `f32` coefficients.
pub type Field32 = field::SpectralField<f32>;
/// Position/velocity pair with `f64` coefficients.
pub type FieldPair64 = field::FieldPair<f64>;
/// Smoothing-multiplier specification over `f64`.
pub type IOperatorSpec64 = multiplier::IOperatorSpec<f64>;
