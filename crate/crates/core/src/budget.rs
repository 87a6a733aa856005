use serde::{Deserialize, Serialize};

/// Effort limits for factorization-driven operations.
///
/// All limits are iteration caps rather than wall-clock limits, so a run with
/// the same inputs and budget is bit-for-bit reproducible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorBudget {
    /// Trial division removes every prime factor below this bound.
    pub trial_bound: u64,
    /// Iteration cap for a single Pollard-rho (Brent) attempt.
    pub rho_iterations: u64,
    /// Number of distinct rho polynomial constants tried per cofactor.
    pub rho_polys: u32,
    /// Seed mixed into the rho constant sequence; recorded in artifacts.
    pub seed: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            trial_bound: 100_000,
            rho_iterations: 1 << 20,
            rho_polys: 5,
            seed: 1,
        }
    }
}

impl FactorBudget {
    /// Cheap preset for per-candidate screening inside search loops.
    pub fn screening() -> Self {
        FactorBudget {
            rho_iterations: 1 << 16,
            ..FactorBudget::default()
        }
    }

    /// Generous preset for one-shot certificate factorizations.
    pub fn certificate() -> Self {
        FactorBudget {
            rho_iterations: 1 << 22,
            rho_polys: 8,
            ..FactorBudget::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}
