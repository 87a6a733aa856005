//! Exact arbitrary-precision arithmetic kernel.
//!
//! Everything here is a pure function of its inputs: primality testing,
//! budgeted factorization, divisor counting restricted to a coprimality
//! class, p-adic valuations, CRT solving and squarefree testing. Internal
//! randomness (the rho constant sequence) is derived deterministically from
//! the budget's seed, so concurrent use needs no shared state.

mod crt;
mod divisor;
mod factor;
mod primality;
mod primes;
mod squarefree;

pub use crt::{crt_solve, mod_inverse, Congruence, CrtSystem};
pub use divisor::{divisor_count_coprime, exact_valuation, radical, valuation};
pub use factor::{factor, factor_u64, FactorStatus, Factorization};
pub use primality::{
    check_prime, is_prime, is_prime_u64, strong_probable_prime, Confidence, PrimalityResult,
};
pub use primes::{first_primes, small_primes, SMALL_PRIME_BOUND};
pub(crate) use primality::pow_mod_u64;
pub use squarefree::{is_squarefree, SquarefreeStatus};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArithError {
    #[error("moduli at positions {0} and {1} share a common factor {2}")]
    NonCoprimeModuli(usize, usize, num_bigint::BigUint),
    #[error("operation requires a complete factorization, but {value} has unfactored cofactor {cofactor}")]
    IncompleteFactorization {
        value: num_bigint::BigUint,
        cofactor: num_bigint::BigUint,
    },
    #[error("empty congruence system")]
    EmptySystem,
}
