use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::factor::{factor, FactorStatus};
use crate::budget::FactorBudget;

/// Three-valued squarefreeness verdict. `Unknown` is returned whenever the
/// budget runs out before the answer is certain; a definite answer is never
/// wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SquarefreeStatus {
    Yes,
    No,
    Unknown,
}

pub fn is_squarefree(n: &BigUint, budget: &FactorBudget) -> SquarefreeStatus {
    if n.is_one() {
        return SquarefreeStatus::Yes;
    }
    let f = factor(n, budget);
    if f.factors.iter().any(|(_, e)| *e >= 2) {
        return SquarefreeStatus::No;
    }
    match &f.status {
        FactorStatus::Complete => SquarefreeStatus::Yes,
        FactorStatus::Incomplete { cofactor } => {
            // A square cofactor settles the question even unfactored.
            let root = cofactor.sqrt();
            if &(&root * &root) == cofactor {
                SquarefreeStatus::No
            } else {
                SquarefreeStatus::Unknown
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_checked_examples() {
        let b = FactorBudget::default();
        assert_eq!(is_squarefree(&BigUint::from(7u32), &b), SquarefreeStatus::Yes);
        assert_eq!(is_squarefree(&BigUint::from(49u32), &b), SquarefreeStatus::No);
        assert_eq!(is_squarefree(&BigUint::from(30u32), &b), SquarefreeStatus::Yes);
        assert_eq!(is_squarefree(&BigUint::one(), &b), SquarefreeStatus::Yes);
    }

    #[test]
    fn square_of_hard_semiprime_detected_without_splitting() {
        let p = (BigUint::one() << 89u32) - BigUint::one();
        let q = BigUint::from(2u32).pow(107) - BigUint::one();
        let n = (&p * &q).pow(2);
        let tiny = FactorBudget {
            rho_iterations: 64,
            rho_polys: 1,
            ..FactorBudget::default()
        };
        // factor() splits perfect powers before giving up, so either route
        // must answer No, never Unknown and never Yes.
        assert_eq!(is_squarefree(&n, &tiny), SquarefreeStatus::No);
    }

    #[test]
    fn hard_squarefree_semiprime_is_unknown_under_tiny_budget() {
        let p = (BigUint::one() << 89u32) - BigUint::one();
        let q = BigUint::from(2u32).pow(107) - BigUint::one();
        let tiny = FactorBudget {
            rho_iterations: 64,
            rho_polys: 1,
            ..FactorBudget::default()
        };
        assert_eq!(is_squarefree(&(&p * &q), &tiny), SquarefreeStatus::Unknown);
    }
}
