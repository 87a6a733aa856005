use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::factor::{FactorStatus, Factorization};
use super::ArithError;

/// `d_k(n) = prod over (p, e) with p coprime to k of (e + 1)`, evaluated from
/// a complete factorization. `d_1` is the ordinary divisor count.
pub fn divisor_count_coprime(f: &Factorization, k: &BigUint) -> Result<BigUint, ArithError> {
    assert!(!k.is_zero(), "k must be positive");
    if let FactorStatus::Incomplete { cofactor } = &f.status {
        return Err(ArithError::IncompleteFactorization {
            value: f.value.clone(),
            cofactor: cofactor.clone(),
        });
    }
    let mut count = BigUint::one();
    for (p, e) in &f.factors {
        if p.gcd(k).is_one() {
            count *= BigUint::from(e + 1);
        }
    }
    Ok(count)
}

/// Largest `e` with `p^e | n`, by repeated exact division.
pub fn valuation(n: &BigUint, p: &BigUint) -> u32 {
    assert!(!n.is_zero(), "valuation requires n >= 1");
    assert!(p > &BigUint::one());
    let mut e = 0u32;
    let mut rest = n.clone();
    loop {
        let (q, r) = rest.div_rem(p);
        if r.is_zero() {
            rest = q;
            e += 1;
        } else {
            return e;
        }
    }
}

/// Exact divisibility `p^e || n`: `p^e` divides `n` and `p^(e+1)` does not.
pub fn exact_valuation(n: &BigUint, p: &BigUint, e: u32) -> bool {
    valuation(n, p) == e
}

/// Product of the distinct primes dividing `n` (1 for n = 1). Requires a
/// complete factorization.
pub fn radical(f: &Factorization) -> Result<BigUint, ArithError> {
    if let FactorStatus::Incomplete { cofactor } = &f.status {
        return Err(ArithError::IncompleteFactorization {
            value: f.value.clone(),
            cofactor: cofactor.clone(),
        });
    }
    Ok(f.factors.iter().map(|(p, _)| p).product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor;
    use crate::budget::FactorBudget;

    fn f(n: u64) -> Factorization {
        factor(&BigUint::from(n), &FactorBudget::default())
    }

    #[test]
    fn hand_checked_examples() {
        let two = BigUint::from(2u32);
        assert_eq!(
            divisor_count_coprime(&f(12), &two).unwrap(),
            BigUint::from(2u32)
        );
        assert_eq!(
            divisor_count_coprime(&f(14), &BigUint::one()).unwrap(),
            BigUint::from(4u32)
        );
        assert_eq!(
            divisor_count_coprime(&f(28623), &two).unwrap(),
            BigUint::from(16u32)
        );
    }

    #[test]
    fn rejects_incomplete() {
        let p = (BigUint::one() << 89u32) - BigUint::one();
        let q = BigUint::from(2u32).pow(107) - BigUint::one();
        let tiny = FactorBudget {
            rho_iterations: 64,
            rho_polys: 1,
            ..FactorBudget::default()
        };
        let fc = factor(&(&p * &q), &tiny);
        assert!(divisor_count_coprime(&fc, &BigUint::one()).is_err());
    }

    #[test]
    fn valuation_examples() {
        let seven = BigUint::from(7u32);
        assert_eq!(valuation(&BigUint::from(28630u32), &seven), 1);
        assert_eq!(valuation(&BigUint::from(11u32), &seven), 0);
        assert_eq!(valuation(&BigUint::from(3430u32), &seven), 3);
        assert!(exact_valuation(&BigUint::from(3430u32), &seven, 3));
        assert!(!exact_valuation(&BigUint::from(3430u32), &seven, 2));
    }
}
