use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// How much trust a primality verdict carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Confidence {
    /// Exhaustive base set; no error possible (all n < 2^64).
    Deterministic,
    /// Miller-Rabin with the given number of fixed bases; error probability
    /// at most 4^-rounds for a composite input.
    Probabilistic { rounds: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimalityResult {
    pub probable_prime: bool,
    pub confidence: Confidence,
}

/// Number of fixed Miller-Rabin bases applied above the deterministic range.
pub const BIG_ROUNDS: u32 = 24;

/// Sufficient deterministic base set for all n < 2^64 (Sorenson-Webster).
const U64_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Primality with the confidence class recorded: deterministic below 2^64,
/// 24-round Miller-Rabin above.
pub fn check_prime(n: &BigUint) -> PrimalityResult {
    if let Some(small) = n.to_u64() {
        return PrimalityResult {
            probable_prime: is_prime_u64(small),
            confidence: Confidence::Deterministic,
        };
    }
    PrimalityResult {
        probable_prime: miller_rabin_big(n),
        confidence: Confidence::Probabilistic { rounds: BIG_ROUNDS },
    }
}

pub fn is_prime(n: &BigUint) -> bool {
    check_prime(n).probable_prime
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'bases: for &a in &U64_BASES {
        let mut x = pow_mod_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

#[inline]
pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

fn miller_rabin_big(n: &BigUint) -> bool {
    // Fixed bases: the first BIG_ROUNDS primes.
    strong_probable_prime(n, &crate::arith::first_primes(BIG_ROUNDS as usize))
}

/// Strong-probable-prime test to the given bases only. Cheaper than the full
/// fixed-base battery; callers own the false-positive risk (used for
/// screening, with a full test on acceptance).
pub fn strong_probable_prime(n: &BigUint, bases: &[u64]) -> bool {
    if n.is_even() {
        return n == &BigUint::from(2u32);
    }
    if n.is_one() {
        return false;
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'bases: for &a in bases {
        if (n % a).is_zero() {
            return n.to_u64() == Some(a);
        }
        let a = BigUint::from(a);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigUint::from(2u32), n);
            if x == n_minus_1 {
                continue 'bases;
            }
            if x.is_one() {
                return false;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        assert!(is_prime(&BigUint::from(2u32)));
        assert!(!is_prime(&BigUint::from(561u32))); // 3 * 11 * 17
        assert!(!is_prime(&BigUint::from(28623u32))); // 3 * 7 * 29 * 47
        assert!(!is_prime(&BigUint::zero()));
        assert!(!is_prime(&BigUint::one()));
    }

    #[test]
    fn u64_agrees_with_trial_division_below_10k() {
        for n in 0..10_000u64 {
            let naive = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime_u64(n), naive, "n = {n}");
        }
    }

    #[test]
    fn confidence_classes() {
        let small = check_prime(&BigUint::from(97u32));
        assert_eq!(small.confidence, Confidence::Deterministic);
        // 2^89 - 1 is a Mersenne prime above the deterministic threshold.
        let m89 = (BigUint::one() << 89u32) - BigUint::one();
        let res = check_prime(&m89);
        assert!(res.probable_prime);
        assert_eq!(
            res.confidence,
            Confidence::Probabilistic { rounds: BIG_ROUNDS }
        );
    }

    #[test]
    fn large_composite_rejected() {
        let m89 = (BigUint::one() << 89u32) - BigUint::one();
        assert!(!is_prime(&(&m89 * &m89)));
    }
}
