//! Experiment drivers: each validates its configuration, produces
//! deterministic artifacts, and reports a pass/fail verdict for its
//! built-in statistical checks.

pub mod commutator_scaling;
pub mod gibbs_invariance;
pub mod global_imethod;
pub mod local_solve;
pub mod rn_convergence;
pub mod variance_check;
pub mod wick_orthogonality;

/// What a run concluded: `passed = false` maps to exit code 2
/// (statistical-test failure), errors map to exit code 1.
pub struct Outcome {
    pub passed: bool,
    pub lines: Vec<String>,
}

impl Outcome {
    pub fn pass(lines: Vec<String>) -> Self {
        Outcome {
            passed: true,
            lines,
        }
    }

    pub fn fail(lines: Vec<String>) -> Self {
        Outcome {
            passed: false,
            lines,
        }
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "pass"
        } else {
            "statistical-failure"
        }
    }
}
