//! Error type shared by all modules.

use thiserror::Error;

/// Errors surfaced by the simulation and verification kernels.
#[derive(Error, Debug)]
pub enum CoreError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("multiplier is not even: m({n1},{n2}) != m({mn1},{mn2}); a real multiplier must satisfy m(-n) = m(n) to preserve real-valuedness")]
    NonEvenMultiplier { n1: i32, n2: i32, mn1: i32, mn2: i32 },

    #[error("grid of {have} points per axis cannot dealias degree-{degree} products of a field with max frequency {max_freq}; need at least {needed}")]
    DealiasCapacity {
        degree: u32,
        max_freq: u32,
        have: usize,
        needed: usize,
    },

    #[error("time grid must start at 0 and be strictly increasing")]
    BadTimeGrid,

    #[error("lattices do not match: ({0}, {1}) vs ({2}, {3})")]
    LatticeMismatch(u32, usize, u32, usize),

    #[error("Picard iteration did not contract after {iterations} iterations (last ratio {ratio:.3}); the window is too large for this data")]
    NoContraction { iterations: usize, ratio: f64 },

    #[error("trajectory norm {norm:.6e} exceeded the configured ceiling {ceiling:.6e} at t = {time:.6}; aborting (norms were: {history:?})")]
    Instability {
        time: f64,
        norm: f64,
        ceiling: f64,
        history: Vec<f64>,
    },

    #[error("density bound violated: observed {observed:.6e} > bound {bound:.6e}")]
    BoundViolated { observed: f64, bound: f64 },

    #[error("insufficient data: need at least {needed} samples, have {have}")]
    InsufficientData { needed: usize, have: usize },

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("malformed snapshot: {0}")]
    MalformedSnapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CoreError {
    /// Convenience constructor for parameter validation failures.
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        CoreError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
