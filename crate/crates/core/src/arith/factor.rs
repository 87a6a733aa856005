use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::primality::{is_prime, is_prime_u64};
use super::primes::small_primes;
use crate::budget::FactorBudget;
use crate::ser;

/// Outcome status of a budgeted factorization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FactorStatus {
    Complete,
    Incomplete {
        /// Composite part that did not split within the budget.
        #[serde(with = "ser::biguint_dec")]
        cofactor: BigUint,
    },
}

/// Exact multiset of (prime, exponent) pairs for a nonnegative integer.
///
/// Invariant: `value = cofactor * prod(prime_i ^ exponent_i)` with primes
/// strictly increasing and each listed prime passing the primality test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    #[serde(with = "ser::biguint_dec")]
    pub value: BigUint,
    #[serde(with = "ser::factor_list")]
    pub factors: Vec<(BigUint, u32)>,
    #[serde(flatten)]
    pub status: FactorStatus,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        matches!(self.status, FactorStatus::Complete)
    }

    /// Exponent of `p` in the factored part (0 if absent).
    pub fn exponent_of(&self, p: &BigUint) -> u32 {
        self.factors
            .iter()
            .find(|(q, _)| q == p)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    /// Recomputes `prod p^e * cofactor` and compares with `value`.
    pub fn product_matches(&self) -> bool {
        let mut prod = BigUint::one();
        for (p, e) in &self.factors {
            prod *= p.pow(*e);
        }
        if let FactorStatus::Incomplete { cofactor } = &self.status {
            prod *= cofactor;
        }
        prod == self.value
    }

    /// Factorization of a product of two integers with known factorizations.
    /// Both inputs must be complete.
    pub fn multiply(&self, other: &Factorization) -> Factorization {
        debug_assert!(self.is_complete() && other.is_complete());
        let mut factors = self.factors.clone();
        for (p, e) in &other.factors {
            match factors.iter_mut().find(|(q, _)| q == p) {
                Some((_, f)) => *f += e,
                None => factors.push((p.clone(), *e)),
            }
        }
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        Factorization {
            value: &self.value * &other.value,
            factors,
            status: FactorStatus::Complete,
        }
    }

    /// Factorization of `self.value / d` given a complete factorization of the
    /// divisor `d`. Panics if `d` does not divide `self.value` exactly.
    pub fn divide_exact(&self, d: &Factorization) -> Factorization {
        debug_assert!(self.is_complete() && d.is_complete());
        let mut factors = self.factors.clone();
        for (p, e) in &d.factors {
            let slot = factors
                .iter_mut()
                .find(|(q, _)| q == p)
                .unwrap_or_else(|| panic!("divisor prime {p} absent from dividend"));
            assert!(slot.1 >= *e, "divisor exponent exceeds dividend at {p}");
            slot.1 -= e;
        }
        factors.retain(|(_, e)| *e > 0);
        Factorization {
            value: &self.value / &d.value,
            factors,
            status: FactorStatus::Complete,
        }
    }
}

/// Budgeted factorization: trial division, then Brent's variant of Pollard
/// rho with a deterministic constant sequence, with primality tests (and
/// perfect-power splitting) applied to every remaining cofactor. Budget
/// exhaustion is reported through [`FactorStatus::Incomplete`], never as a
/// failure.
pub fn factor(n: &BigUint, budget: &FactorBudget) -> Factorization {
    assert!(!n.is_zero(), "factor requires n >= 1");
    let mut factors: Vec<(BigUint, u32)> = Vec::new();
    let mut rest = n.clone();

    for &p in small_primes() {
        if p >= budget.trial_bound {
            break;
        }
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0u32;
        loop {
            let (q, r) = rest.div_rem(&pb);
            if r.is_zero() {
                rest = q;
                e += 1;
            } else {
                break;
            }
        }
        if e > 0 {
            factors.push((pb, e));
        }
    }

    let mut incomplete: Vec<BigUint> = Vec::new();
    if !rest.is_one() {
        let mut stack = vec![rest];
        while let Some(m) = stack.pop() {
            if m.is_one() {
                continue;
            }
            if is_prime(&m) {
                push_prime(&mut factors, m, 1);
                continue;
            }
            if let Some((root, exp)) = perfect_power(&m) {
                if is_prime(&root) {
                    push_prime(&mut factors, root, exp);
                } else {
                    for _ in 0..exp {
                        stack.push(root.clone());
                    }
                }
                continue;
            }
            match split(&m, budget) {
                Some(d) => {
                    let q = &m / &d;
                    stack.push(d);
                    stack.push(q);
                }
                None => incomplete.push(m),
            }
        }
    }

    factors.sort_by(|a, b| a.0.cmp(&b.0));
    let status = if incomplete.is_empty() {
        FactorStatus::Complete
    } else {
        // Several stuck composites collapse into a single cofactor.
        let cofactor = incomplete.iter().product();
        FactorStatus::Incomplete { cofactor }
    };
    Factorization {
        value: n.clone(),
        factors,
        status,
    }
}

/// Complete factorization of a `u64` (always succeeds; deterministic).
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1);
    let mut out = Vec::new();
    let mut rest = n;
    for &p in small_primes() {
        if p * p > rest {
            break;
        }
        let mut e = 0;
        while rest.is_multiple_of(p) {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut stack = Vec::new();
    if rest > 1 {
        stack.push(rest);
    }
    while let Some(m) = stack.pop() {
        if is_prime_u64(m) {
            match out.iter_mut().find(|(p, _)| *p == m) {
                Some((_, e)) => *e += 1,
                None => out.push((m, 1)),
            }
        } else {
            let d = rho_u64(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    out.sort();
    out
}

fn push_prime(factors: &mut Vec<(BigUint, u32)>, p: BigUint, e: u32) {
    match factors.iter_mut().find(|(q, _)| *q == p) {
        Some((_, f)) => *f += e,
        None => factors.push((p, e)),
    }
}

/// Largest root decomposition m = root^exp with exp maximal, if any.
fn perfect_power(m: &BigUint) -> Option<(BigUint, u32)> {
    let bits = m.bits() as u32;
    for exp in (2..=bits).rev() {
        let root = m.nth_root(exp);
        if root > BigUint::one() && root.pow(exp) == *m {
            return Some((root, exp));
        }
    }
    None
}

/// One nontrivial divisor of composite `m`, or `None` if the budget runs out.
fn split(m: &BigUint, budget: &FactorBudget) -> Option<BigUint> {
    if let Some(small) = m.to_u64() {
        return Some(BigUint::from(rho_u64(small)));
    }
    for i in 0..budget.rho_polys {
        let c = budget.seed.wrapping_add(i as u64).max(1);
        if let Some(d) = brent_rho(m, c, budget.rho_iterations) {
            return Some(d);
        }
    }
    None
}

/// Brent-cycle Pollard rho on arbitrary-precision integers with an iteration
/// cap. `m` must be odd and composite (trial division already ran).
fn brent_rho(m: &BigUint, c: u64, cap: u64) -> Option<BigUint> {
    let c = BigUint::from(c);
    let mut y = BigUint::from(2u32);
    let mut r: u64 = 1;
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    let mut used: u64 = 0;
    const BATCH: u64 = 128;

    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = (&y * &y + &c) % m;
        }
        let mut k: u64 = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let steps = BATCH.min(r - k);
            for _ in 0..steps {
                y = (&y * &y + &c) % m;
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (&q * &diff) % m;
            }
            g = q.gcd(m);
            k += steps;
            used += steps;
            if used >= cap && g.is_one() {
                return None;
            }
        }
        r <<= 1;
    }
    if &g == m {
        // Backtrack one step at a time.
        loop {
            ys = (&ys * &ys + &c) % m;
            let diff = if x > ys { &x - &ys } else { &ys - &x };
            g = diff.gcd(m);
            if !g.is_one() {
                break;
            }
        }
    }
    if g.is_one() || &g == m {
        None
    } else {
        Some(g)
    }
}

/// Uncapped Brent rho for u64 composites (always terminates quickly because
/// the smallest factor is below 2^32).
fn rho_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c: u64 = 1;
    loop {
        let step = |v: u64| ((v as u128 * v as u128 + c as u128) % n as u128) as u64;
        let mut x: u64 = 2;
        let mut y: u64 = 2;
        let mut d: u64 = 1;
        while d == 1 {
            x = step(x);
            y = step(step(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(n: u64) -> Factorization {
        factor(&BigUint::from(n), &FactorBudget::default())
    }

    #[test]
    fn hand_checked_examples() {
        let one = f(1);
        assert!(one.factors.is_empty() && one.is_complete());

        let a = f(28630);
        assert_eq!(
            a.factors,
            vec![
                (BigUint::from(2u32), 1),
                (BigUint::from(5u32), 1),
                (BigUint::from(7u32), 1),
                (BigUint::from(409u32), 1)
            ]
        );
        assert!(a.is_complete());

        let b = f(44100);
        assert_eq!(
            b.factors,
            vec![
                (BigUint::from(2u32), 2),
                (BigUint::from(3u32), 2),
                (BigUint::from(5u32), 2),
                (BigUint::from(7u32), 2)
            ]
        );
    }

    #[test]
    fn roundtrip_small_range() {
        for n in 1..=10_000u64 {
            let fc = f(n);
            assert!(fc.product_matches(), "n = {n}");
            assert!(fc.is_complete(), "n = {n}");
        }
    }

    #[test]
    fn factor_u64_matches_big_path() {
        for n in [2u64, 97, 561, 44100, 28623, 1 << 40, 999999999989] {
            let small: Vec<(BigUint, u32)> = factor_u64(n)
                .into_iter()
                .map(|(p, e)| (BigUint::from(p), e))
                .collect();
            assert_eq!(small, f(n).factors, "n = {n}");
        }
    }

    #[test]
    fn perfect_power_split() {
        // (10^9 + 7)^2 exceeds the trial bound and is a perfect square.
        let p = BigUint::from(1_000_000_007u64);
        let fc = factor(&(&p * &p), &FactorBudget::default());
        assert_eq!(fc.factors, vec![(p, 2)]);
        assert!(fc.is_complete());
    }

    #[test]
    fn budget_exhaustion_is_honest() {
        // Product of two ~80-bit primes with a crippled budget.
        let p = (BigUint::one() << 89u32) - BigUint::one(); // Mersenne prime
        let q = BigUint::from(2u32).pow(107) - BigUint::one(); // Mersenne prime
        let n = &p * &q;
        let tiny = FactorBudget {
            rho_iterations: 64,
            rho_polys: 1,
            ..FactorBudget::default()
        };
        let fc = factor(&n, &tiny);
        assert!(fc.product_matches());
        match &fc.status {
            FactorStatus::Incomplete { cofactor } => assert_eq!(cofactor, &n),
            FactorStatus::Complete => panic!("expected incomplete"),
        }
    }
}
