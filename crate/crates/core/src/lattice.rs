//! The frequency lattice of the 2-torus and its square truncations.
//!
//! Fields live on the period-2π torus with characters e_n(x) = exp(i n·x),
//! n ∈ ℤ². A `LatticeSpec` retains the square block {|n₁|, |n₂| ≤ K} and
//! fixes the collocation grid used for pointwise (physical-space) work.

use crate::error::CoreError;
use crate::scalar::Real;
use crate::Result;
use serde::{Deserialize, Serialize};

/// A spatial frequency n = (n₁, n₂) ∈ ℤ².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Freq {
    pub n1: i32,
    pub n2: i32,
}

impl Freq {
    #[inline]
    pub fn new(n1: i32, n2: i32) -> Self {
        Freq { n1, n2 }
    }

    #[inline]
    pub fn zero() -> Self {
        Freq { n1: 0, n2: 0 }
    }

    /// |n|² = n₁² + n₂².
    #[inline]
    pub fn norm_sq(self) -> i64 {
        self.n1 as i64 * self.n1 as i64 + self.n2 as i64 * self.n2 as i64
    }

    /// Bessel weight ⟨n⟩ = (1 + |n|²)^{1/2}.
    #[inline]
    pub fn bessel<F: Real>(self) -> F {
        F::of(1.0 + self.norm_sq() as f64).sqrt()
    }

    /// ⟨n⟩² = 1 + |n|², exact in integer arithmetic before conversion.
    #[inline]
    pub fn bessel_sq<F: Real>(self) -> F {
        F::of(1.0 + self.norm_sq() as f64)
    }

    #[inline]
    pub fn neg(self) -> Self {
        Freq::new(-self.n1, -self.n2)
    }

    /// Whether |n| ≤ r (Euclidean ball cutoff, boundary inclusive).
    #[inline]
    pub fn in_ball(self, radius: f64) -> bool {
        (self.norm_sq() as f64) <= radius * radius
    }

    /// Stable 64-bit tag used to key per-mode noise substreams.
    #[inline]
    pub fn stream_tag(self) -> u64 {
        ((self.n1 as u32 as u64) << 32) | (self.n2 as u32 as u64)
    }
}

/// Bessel weight ⟨n⟩ = (1 + n₁² + n₂²)^{1/2} as a free function.
#[inline]
pub fn bessel_weight<F: Real>(n: Freq) -> F {
    n.bessel()
}

/// Square frequency truncation plus its collocation grid.
///
/// Invariants: `grid_size` is even and at least 2K+2, which leaves room
/// for representing first powers exactly; higher powers are computed on
/// internally padded grids (see [`crate::fft`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    max_freq: u32,
    grid_size: usize,
}

impl LatticeSpec {
    /// Construct a lattice keeping |n₁|, |n₂| ≤ `max_freq` with the given
    /// collocation grid. Fails unless `grid_size` is even and ≥ 2K+2.
    pub fn new(max_freq: u32, grid_size: usize) -> Result<Self> {
        let min = 2 * max_freq as usize + 2;
        if grid_size < min {
            return Err(CoreError::invalid(
                "grid_size",
                format!("must be at least 2K+2 = {min}, got {grid_size}"),
            ));
        }
        if grid_size % 2 != 0 {
            return Err(CoreError::invalid(
                "grid_size",
                format!("must be even, got {grid_size}"),
            ));
        }
        Ok(LatticeSpec {
            max_freq,
            grid_size,
        })
    }

    /// Lattice with the minimal admissible grid (2K+2 rounded up to even).
    pub fn with_min_grid(max_freq: u32) -> Self {
        LatticeSpec {
            max_freq,
            grid_size: 2 * max_freq as usize + 2,
        }
    }

    #[inline]
    pub fn max_freq(&self) -> u32 {
        self.max_freq
    }

    #[inline]
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Retained modes per axis, 2K+1.
    #[inline]
    pub fn modes_per_axis(&self) -> usize {
        2 * self.max_freq as usize + 1
    }

    /// Total number of retained modes, (2K+1)².
    #[inline]
    pub fn num_modes(&self) -> usize {
        let m = self.modes_per_axis();
        m * m
    }

    #[inline]
    pub fn contains(&self, n: Freq) -> bool {
        let k = self.max_freq as i32;
        n.n1.abs() <= k && n.n2.abs() <= k
    }

    /// Row-major storage index: n₁ outer from −K..K, n₂ inner from −K..K.
    #[inline]
    pub fn index(&self, n: Freq) -> usize {
        debug_assert!(self.contains(n));
        let k = self.max_freq as i32;
        let m = self.modes_per_axis();
        (n.n1 + k) as usize * m + (n.n2 + k) as usize
    }

    /// Inverse of [`Self::index`].
    #[inline]
    pub fn freq_at(&self, index: usize) -> Freq {
        let k = self.max_freq as i32;
        let m = self.modes_per_axis();
        Freq::new((index / m) as i32 - k, (index % m) as i32 - k)
    }

    /// All retained modes in storage order.
    pub fn modes(&self) -> impl Iterator<Item = Freq> + '_ {
        let k = self.max_freq as i32;
        (-k..=k).flat_map(move |n1| (-k..=k).map(move |n2| Freq::new(n1, n2)))
    }

    /// One representative per conjugate pair {n, −n}, zero mode excluded.
    ///
    /// The representative is the mode with n₁ > 0, or n₁ = 0 and n₂ > 0,
    /// so mirroring `coeff(−n) = conj(coeff(n))` covers the lattice.
    pub fn representatives(&self) -> impl Iterator<Item = Freq> + '_ {
        self.modes()
            .filter(|n| n.n1 > 0 || (n.n1 == 0 && n.n2 > 0))
    }

    /// Largest Euclidean ball radius fully contained in the square block.
    #[inline]
    pub fn ball_radius(&self) -> f64 {
        self.max_freq as f64
    }
}

/// All lattice points of ℤ² with |n| ≤ `radius` (full plane, not limited
/// to any square truncation). Used by the exact variance sums.
pub fn ball_modes(radius: f64) -> impl Iterator<Item = Freq> {
    let k = radius.floor() as i32;
    let r2 = radius * radius;
    (-k..=k).flat_map(move |n1| {
        (-k..=k).filter_map(move |n2| {
            let n = Freq::new(n1, n2);
            ((n.norm_sq() as f64) <= r2).then_some(n)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_weight_matches_definition() {
        assert_eq!(bessel_weight::<f64>(Freq::zero()), 1.0);
        assert!((bessel_weight::<f64>(Freq::new(1, 0)) - 2f64.sqrt()).abs() < 1e-15);
        // Independent evaluation of (1 + 9 + 16)^{1/2}.
        let expected = (1.0f64 + 3.0 * 3.0 + 4.0 * 4.0).sqrt();
        assert!((bessel_weight::<f64>(Freq::new(3, 4)) - expected).abs() < 1e-15);
        assert!((expected - 26f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn grid_size_invariants() {
        assert!(LatticeSpec::new(4, 9).is_err());
        assert!(LatticeSpec::new(4, 8).is_err());
        let l = LatticeSpec::new(4, 10).unwrap();
        assert_eq!(l.modes_per_axis(), 9);
        assert_eq!(l.num_modes(), 81);
    }

    #[test]
    fn index_round_trip() {
        let l = LatticeSpec::with_min_grid(3);
        for (i, n) in l.modes().enumerate() {
            assert_eq!(l.index(n), i);
            assert_eq!(l.freq_at(i), n);
        }
    }

    #[test]
    fn representatives_partition_lattice() {
        let l = LatticeSpec::with_min_grid(5);
        let reps: Vec<Freq> = l.representatives().collect();
        // {0} ∪ reps ∪ -reps = lattice, disjointly.
        assert_eq!(2 * reps.len() + 1, l.num_modes());
        for n in &reps {
            assert!(!reps.contains(&n.neg()));
        }
    }

    #[test]
    fn ball_is_boundary_inclusive() {
        let modes: Vec<Freq> = ball_modes(1.0).collect();
        assert_eq!(modes.len(), 5);
        let modes: Vec<Freq> = ball_modes(0.0).collect();
        assert_eq!(modes.len(), 1);
    }
}
