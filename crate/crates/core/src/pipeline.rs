//! From a verified construction certificate to solutions of
//! d_k(u) = d_k(u+B): linear forms F_n(x) are manufactured so that matching
//! plain divisor counts d(F_m(x)) = d(F_n(x)) at any x yields a verified
//! solution u.
//!
//! The chain: A = B·k·N!·∏a_n; fresh primes q_n not dividing A carry powers
//! r_n = q_n^{d_k(B·a_n)−1}; a single CRT value X gives a_n·A·X + 1 = r_n·Y_n
//! with Y_n coprime to A·r_n; then F_n(x) = a_n·A·R_n·R·x + Y_n stays coprime
//! to A·R for every x, and the two sides of the B-identity
//! (B·a_m/d_mn)·r_n·F_n(x) = B + (B·a_n/d_mn)·r_m·F_m(x) differ by exactly B.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    divisor_count_coprime, factor, small_primes, ArithError, Confidence, FactorStatus,
    Factorization,
};
use crate::budget::FactorBudget;
use crate::lemma::ConstructionCertificate;
use crate::ser;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("arithmetic failure: {0}")]
    Arith(#[from] ArithError),
    #[error("certificate has not passed verification")]
    UnverifiedCertificate,
    #[error("pipeline invariant violated: {0}")]
    InvariantViolation(String),
    #[error("divisor-count mismatch for u = {u}: d_k(u) = {dku}, d_k(u+B) = {dkub}; the emitted match is wrong")]
    DivisorCountMismatch {
        u: BigUint,
        dku: BigUint,
        dkub: BigUint,
    },
}

/// Everything needed to evaluate and reason about the forms F_n.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineState {
    pub cert: ConstructionCertificate,
    /// A = B·k·N!·∏ a_n.
    #[serde(with = "ser::biguint_dec")]
    pub big_a: BigUint,
    /// The N smallest primes not dividing A.
    pub aux_primes: Vec<u64>,
    /// d_k(B·a_n) for each member.
    #[serde(with = "ser::biguint_vec_dec")]
    pub dk_ban: Vec<BigUint>,
    /// r_n = aux_primes[n] ^ (d_k(B·a_n) − 1).
    #[serde(with = "ser::biguint_vec_dec")]
    pub r: Vec<BigUint>,
    /// Least nonnegative solution of a_n·A·x + 1 ≡ r_n (mod r_n²) for all n.
    #[serde(with = "ser::biguint_dec")]
    pub big_x: BigUint,
    /// Y_n = (a_n·A·X + 1)/r_n.
    #[serde(with = "ser::biguint_vec_dec")]
    pub y: Vec<BigUint>,
    /// R = ∏ r_n and R_n = R/r_n.
    #[serde(with = "ser::biguint_dec")]
    pub big_r: BigUint,
    #[serde(with = "ser::biguint_vec_dec")]
    pub big_r_except: Vec<BigUint>,
    /// Cached x-coefficients a_n·A·R_n·R of the forms (they reach millions
    /// of bits; recomputing per evaluation would dominate everything).
    #[serde(with = "ser::biguint_vec_dec")]
    pub coefficients: Vec<BigUint>,
    /// Distinct primes of A·R, from the certificate witnesses.
    #[serde(with = "ser::biguint_vec_dec")]
    pub ar_prime_list: Vec<BigUint>,
}

/// Inverse of a modulo q^e for prime q not dividing a, by Newton lifting:
/// the inverse mod q doubles in precision each step. Far cheaper than
/// extended Euclid at the multi-megabit moduli the pipeline produces.
fn inv_mod_prime_power(a: &BigUint, q: u64, e: u32) -> BigUint {
    let qb = BigUint::from(q);
    let a_mod_q = (a % q).to_u64().expect("fits");
    let mut z = BigUint::from(crate::arith::pow_mod_u64(a_mod_q, q - 2, q));
    if q == 2 {
        z = BigUint::one(); // odd numbers are self-inverse mod 2
    }
    let two = BigUint::from(2u32);
    let mut prec: u32 = 1;
    while prec < e {
        prec = (prec * 2).min(e);
        let modulus = qb.pow(prec);
        let az = (a % &modulus) * &z % &modulus;
        z = (&z * ((&two + &modulus - az) % &modulus)) % &modulus;
    }
    z
}

/// Assemble the pipeline and verify every invariant before returning.
/// Failures are hard errors: the inputs come from a verified certificate, so
/// any violation is a bug, not bad data.
pub fn build_pipeline(
    cert: &ConstructionCertificate,
    budget: &FactorBudget,
) -> Result<PipelineState, PipelineError> {
    if !cert.checks.passed {
        return Err(PipelineError::UnverifiedCertificate);
    }
    let t = &cert.tableau;
    let n = cert.a.len();
    let factorial: BigUint = (1..=n as u64).map(BigUint::from).product();
    let big_a = &t.b * &t.k_reduced * factorial * cert.a.iter().product::<BigUint>();

    let aux_primes: Vec<u64> = small_primes()
        .iter()
        .copied()
        .filter(|&p| !(&big_a % p).is_zero())
        .take(n)
        .collect();
    if aux_primes.len() != n {
        return Err(PipelineError::InvariantViolation(
            "not enough precomputed primes to avoid A".into(),
        ));
    }

    let b_fact = factor(&t.b, budget);
    if !b_fact.is_complete() {
        return Err(PipelineError::InvariantViolation(
            "B did not factor within budget".into(),
        ));
    }
    let mut dk_ban = Vec::with_capacity(n);
    for i in 0..n {
        let fa = Factorization {
            value: cert.a[i].clone(),
            factors: cert.a_factors[i].factors.clone(),
            status: FactorStatus::Complete,
        };
        if !fa.product_matches() {
            return Err(PipelineError::InvariantViolation(format!(
                "stored factorization of a_{i} does not multiply back"
            )));
        }
        dk_ban.push(divisor_count_coprime(&b_fact.multiply(&fa), &t.k_reduced)?);
    }

    let r: Vec<BigUint> = aux_primes
        .iter()
        .zip(&dk_ban)
        .map(|(&q, dk)| {
            let e = (dk - BigUint::one())
                .to_u32()
                .expect("divisor counts are modest");
            BigUint::from(q).pow(e)
        })
        .collect();

    // a_n·A·x ≡ r_n − 1 (mod r_n²) for every n simultaneously. The moduli
    // are powers of the pairwise-distinct q_n, so coprimality is structural
    // and the inverses are Newton lifts — the generic CRT path with extended
    // Euclid is far too slow at these modulus sizes.
    let exps: Vec<u32> = dk_ban
        .iter()
        .map(|dk| {
            2 * (dk - BigUint::one())
                .to_u32()
                .expect("divisor counts are modest")
        })
        .collect();
    let mut big_x = BigUint::zero();
    let mut m_acc = BigUint::one();
    for i in 0..n {
        if exps[i] == 0 {
            continue; // r_i = 1: the congruence is vacuous
        }
        let modulus = &r[i] * &r[i];
        let coeff = &cert.a[i] * &big_a;
        let target = (BigInt::from(&r[i] - BigUint::one())
            * BigInt::from(inv_mod_prime_power(&coeff, aux_primes[i], exps[i])))
        .mod_floor(&BigInt::from(modulus.clone()))
        .to_biguint()
        .expect("nonnegative");
        // Solve big_x + m_acc·t ≡ target (mod modulus).
        let diff = (BigInt::from(target) - BigInt::from(&big_x % &modulus))
            .mod_floor(&BigInt::from(modulus.clone()))
            .to_biguint()
            .expect("nonnegative");
        let t = diff * inv_mod_prime_power(&m_acc, aux_primes[i], exps[i]) % &modulus;
        big_x += &m_acc * t;
        m_acc *= &modulus;
    }

    let y: Vec<BigUint> = (0..n)
        .map(|i| {
            let lhs = &cert.a[i] * &big_a * &big_x + BigUint::one();
            let (q, rem) = lhs.div_rem(&r[i]);
            assert!(rem.is_zero(), "r_n divides a_n·A·X + 1 by construction");
            q
        })
        .collect();
    let big_r: BigUint = r.iter().product();
    let big_r_except: Vec<BigUint> = r.iter().map(|ri| &big_r / ri).collect();
    let coefficients: Vec<BigUint> = (0..n)
        .map(|i| &cert.a[i] * &big_a * &big_r_except[i] * &big_r)
        .collect();
    let ar_prime_list = collect_ar_primes(cert, &aux_primes, &b_fact);

    let state = PipelineState {
        cert: cert.clone(),
        big_a,
        aux_primes,
        dk_ban,
        r,
        big_x,
        y,
        big_r,
        big_r_except,
        coefficients,
        ar_prime_list,
    };
    state.verify_invariants()?;
    Ok(state)
}

/// Distinct primes dividing A·R = B·k·N!·∏a_n·∏r_n, assembled from the
/// certificate witnesses — no factoring of A itself is ever needed.
fn collect_ar_primes(
    cert: &ConstructionCertificate,
    aux_primes: &[u64],
    b_fact: &Factorization,
) -> Vec<BigUint> {
    let mut primes: std::collections::BTreeSet<BigUint> = std::collections::BTreeSet::new();
    for (p, _) in &b_fact.factors {
        primes.insert(p.clone());
    }
    for (p, _) in factor(&cert.tableau.k_reduced, &FactorBudget::default()).factors {
        primes.insert(p);
    }
    let n = cert.a.len() as u64;
    for p in small_primes().iter().take_while(|&&p| p <= n) {
        primes.insert(BigUint::from(*p));
    }
    for w in &cert.a_factors {
        for (p, _) in &w.factors {
            primes.insert(p.clone());
        }
    }
    for &q in aux_primes {
        primes.insert(BigUint::from(q));
    }
    primes.into_iter().collect()
}

impl PipelineState {
    pub fn verify_invariants(&self) -> Result<(), PipelineError> {
        let n = self.cert.a.len();
        let t = &self.cert.tableau;
        let fail = |msg: String| Err(PipelineError::InvariantViolation(msg));

        let factorial: BigUint = (1..=n as u64).map(BigUint::from).product();
        if self.big_a != &t.b * &t.k_reduced * factorial * self.cert.a.iter().product::<BigUint>()
        {
            return fail("A != B·k·N!·∏a_n".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for &q in &self.aux_primes {
            if (&self.big_a % q).is_zero() {
                return fail(format!("q = {q} divides A"));
            }
            if !seen.insert(q) {
                return fail(format!("q = {q} repeated"));
            }
        }
        for i in 0..n {
            let e = (&self.dk_ban[i] - BigUint::one())
                .to_u32()
                .expect("modest exponent");
            if self.r[i] != BigUint::from(self.aux_primes[i]).pow(e) {
                return fail(format!("r_{i} is not q_{i}^(d_k(B·a_{i})−1)"));
            }
            let lhs = &self.cert.a[i] * &self.big_a * &self.big_x + BigUint::one();
            if lhs != &self.r[i] * &self.y[i] {
                return fail(format!("a_{i}·A·X + 1 != r_{i}·Y_{i}"));
            }
            // Exactly one factor of r_n beyond r_n itself is excluded:
            // a_n·A·X + 1 ≡ r_n (mod r_n²) forces Y_n ≡ 1 (mod q_n).
            if !(&self.y[i] % self.aux_primes[i]).is_one() && !self.r[i].is_one() {
                return fail(format!("Y_{i} not ≡ 1 mod q_{i}"));
            }
        }
        // gcd(Y_n, A·R) = 1 (which subsumes gcd(Y_n, A·r_n) = 1) via the
        // known prime set of A·R; a literal gcd at these sizes would be
        // quadratic in millions of bits.
        for i in 0..n {
            for p in &self.ar_prime_list {
                if (&self.y[i] % p).is_zero() {
                    return fail(format!("prime {p} of A·R divides Y_{i}"));
                }
            }
        }
        if self.big_r != self.r.iter().product::<BigUint>() {
            return fail("R != ∏ r_n".into());
        }
        for i in 0..n {
            if self.big_r_except[i] != &self.big_r / &self.r[i] {
                return fail(format!("R_{i} != R/r_{i}"));
            }
            if self.coefficients[i]
                != &self.cert.a[i] * &self.big_a * &self.big_r_except[i] * &self.big_r
            {
                return fail(format!("cached coefficient {i} is stale"));
            }
        }
        Ok(())
    }

    /// Coefficient of x in F_n.
    pub fn coefficient(&self, n: usize) -> &BigUint {
        &self.coefficients[n]
    }

    /// Exact value of F_n(x) = a_n·A·R_n·R·x + Y_n.
    pub fn f_eval(&self, n: usize, x: &BigUint) -> BigUint {
        let v = &self.coefficients[n] * x + &self.y[n];
        debug_assert!(self.coprime_to_ar(&v), "F_n(x) must be coprime to A·R");
        v
    }

    /// Is v coprime to A·R? Checked prime-by-prime against the known
    /// factorization of A·R, which is far cheaper than a gcd of integers
    /// this size.
    pub fn coprime_to_ar(&self, v: &BigUint) -> bool {
        self.ar_prime_list.iter().all(|p| !(v % p).is_zero())
    }

    /// d_mn = a_m − a_n (positive; callers arrange a_m > a_n).
    fn d_mn(&self, m: usize, n: usize) -> BigUint {
        (BigInt::from(self.cert.a[m].clone()) - BigInt::from(self.cert.a[n].clone()))
            .magnitude()
            .clone()
    }

    /// B·a_i/d_mn, exact by the difference-divides-gcd property.
    fn b_part(&self, i: usize, m: usize, n: usize) -> BigUint {
        let d = self.d_mn(m, n);
        let (q, rem) = (&self.cert.tableau.b * &self.cert.a[i]).div_rem(&d);
        assert!(rem.is_zero(), "d_mn divides B·a_i");
        q
    }

    /// Default pair for scanning: a_m > a_n with the smallest combined form
    /// size, ties broken by index order. Deterministic.
    pub fn default_pair(&self) -> (usize, usize) {
        let len = self.cert.a.len();
        let mut best: Option<(u64, usize, usize)> = None;
        for m in 0..len {
            for n in 0..len {
                if self.cert.a[m] <= self.cert.a[n] {
                    continue;
                }
                let size = self.coefficient(m).bits() + self.coefficient(n).bits();
                if best.is_none_or(|(s, bm, bn)| (size, m, n) < (s, bm, bn)) {
                    best = Some((size, m, n));
                }
            }
        }
        let (_, m, n) = best.expect("at least one pair with distinct members");
        (m, n)
    }
}

/// The identity (B·a_m/d_mn)·r_n·F_n(x) = B + (B·a_n/d_mn)·r_m·F_m(x),
/// checked exactly at the given x. Requires a_m > a_n.
pub fn verify_b_identity(state: &PipelineState, m: usize, n: usize, x: &BigUint) -> bool {
    assert!(state.cert.a[m] > state.cert.a[n], "caller orders the pair");
    let lhs = state.b_part(m, m, n) * &state.r[n] * state.f_eval(n, x);
    let rhs = &state.cert.tableau.b + state.b_part(n, m, n) * &state.r[m] * state.f_eval(m, x);
    lhs == rhs
}

/// Symbolic form of the identity: equal x-coefficients on both sides, and
/// constants differing by exactly B. With those, one point pins the line.
pub fn verify_b_identity_symbolic(state: &PipelineState, m: usize, n: usize) -> bool {
    assert!(state.cert.a[m] > state.cert.a[n]);
    let coeff_l = state.b_part(m, m, n) * &state.r[n] * state.coefficient(n);
    let coeff_r = state.b_part(n, m, n) * &state.r[m] * state.coefficient(m);
    let const_l = state.b_part(m, m, n) * &state.r[n] * &state.y[n];
    let const_r = state.b_part(n, m, n) * &state.r[m] * &state.y[m];
    coeff_l == coeff_r && const_l == &state.cert.tableau.b + const_r
}

/// Pairwise coprimality of {B·a_m/d_mn, r_n, F_n(x)} and the mirrored
/// triple. Always true for a sound pipeline; false flags an upstream bug.
pub fn coprime_in_pairs_check(state: &PipelineState, m: usize, n: usize, x: &BigUint) -> bool {
    assert!(state.cert.a[m] > state.cert.a[n]);
    let mut ok = true;
    for (hi, lo) in [(m, n), (n, m)] {
        let part = state.b_part(hi, m, n);
        let f = state.f_eval(lo, x);
        // r_lo is a power of the single prime q_lo, so coprimality against
        // it is one divisibility test; and the gcd with the huge form value
        // is taken after reduction mod the small operand.
        let q = state.aux_primes[lo];
        let r_coprime = state.r[lo].is_one() || (!(&part % q).is_zero() && !(&f % q).is_zero());
        let part_f_coprime = part.is_one() || (&f % &part).gcd(&part).is_one();
        ok &= r_coprime && part_f_coprime;
    }
    ok
}

/// Outcome for a single scanned x.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanOutcome {
    /// Both forms factored completely and the divisor counts agree.
    Match {
        #[serde(with = "ser::biguint_dec")]
        d_value: BigUint,
    },
    /// Both factored completely; counts differ.
    NoMatch {
        #[serde(with = "ser::biguint_dec")]
        d_m: BigUint,
        #[serde(with = "ser::biguint_dec")]
        d_n: BigUint,
    },
    /// At least one form did not factor within the per-x budget. Never
    /// counted as a non-match.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub x: u64,
    pub outcome: ScanOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub m: usize,
    pub n: usize,
    pub x_start: u64,
    pub x_end: u64,
    pub scanned: u64,
    pub matched: Vec<ScanRecord>,
    pub unmatched: u64,
    pub unknown: u64,
}

/// Scan x over a range, attempting to factor F_m(x) and F_n(x) under the
/// per-x budget and recording x values where both factored completely with
/// equal plain divisor counts. d_k and d agree on these forms since they are
/// coprime to A ⊇ k. Deterministic for fixed (range, budget).
pub fn scan_divisor_match(
    state: &PipelineState,
    m: usize,
    n: usize,
    x_range: std::ops::Range<u64>,
    budget: &FactorBudget,
) -> ScanSummary {
    let one = BigUint::one();
    let mut summary = ScanSummary {
        m,
        n,
        x_start: x_range.start,
        x_end: x_range.end,
        scanned: 0,
        matched: Vec::new(),
        unmatched: 0,
        unknown: 0,
    };
    for x in x_range {
        summary.scanned += 1;
        let xv = BigUint::from(x);
        let fm = factor(&state.f_eval(m, &xv), budget);
        if !fm.is_complete() {
            summary.unknown += 1;
            continue;
        }
        let fn_ = factor(&state.f_eval(n, &xv), budget);
        if !fn_.is_complete() {
            summary.unknown += 1;
            continue;
        }
        let dm = divisor_count_coprime(&fm, &one).expect("complete");
        let dn = divisor_count_coprime(&fn_, &one).expect("complete");
        if dm == dn {
            summary.matched.push(ScanRecord {
                x,
                outcome: ScanOutcome::Match { d_value: dm },
            });
        } else {
            summary.unmatched += 1;
        }
    }
    summary
}

/// A fully verified solution of d_k(u) = d_k(u + B).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionCertificate {
    pub schema_version: u32,
    pub m: usize,
    pub n: usize,
    pub x: u64,
    #[serde(with = "ser::biguint_dec")]
    pub u: BigUint,
    #[serde(with = "ser::biguint_dec")]
    pub b: BigUint,
    #[serde(with = "ser::biguint_dec")]
    pub k: BigUint,
    #[serde(with = "ser::factor_list")]
    pub factor_u: Vec<(BigUint, u32)>,
    #[serde(with = "ser::factor_list")]
    pub factor_ub: Vec<(BigUint, u32)>,
    /// Weakest primality confidence among all certified prime factors.
    pub confidence: Confidence,
    #[serde(with = "ser::biguint_dec")]
    pub dk_value: BigUint,
}

/// Result of attempting to certify a match: either a certificate, or an
/// honest report that u could not be fully factored within the budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmitOutcome {
    Certified(SolutionCertificate),
    Unverifiable {
        #[serde(with = "ser::biguint_dec")]
        u: BigUint,
        reason: String,
    },
}

/// Certify a match found by the scan: build u = (B·a_n/d_mn)·r_m·F_m(x),
/// factor u and u+B from scratch, and recompute both divisor counts. The
/// certificate is only issued if they agree; disagreement is a hard error
/// because it contradicts a proved identity. If a_m < a_n the indices are
/// swapped internally.
pub fn emit_solution(
    state: &PipelineState,
    m: usize,
    n: usize,
    x: u64,
    budget: &FactorBudget,
) -> Result<EmitOutcome, PipelineError> {
    let (m, n) = if state.cert.a[m] > state.cert.a[n] {
        (m, n)
    } else {
        (n, m)
    };
    let t = &state.cert.tableau;
    let xv = BigUint::from(x);
    let u = state.b_part(n, m, n) * &state.r[m] * state.f_eval(m, &xv);
    let ub_direct = &u + &t.b;
    let ub_identity = state.b_part(m, m, n) * &state.r[n] * state.f_eval(n, &xv);
    if ub_direct != ub_identity {
        return Err(PipelineError::InvariantViolation(
            "u + B disagrees with the identity form".into(),
        ));
    }

    let fu = factor(&u, budget);
    if !fu.is_complete() {
        return Ok(EmitOutcome::Unverifiable {
            u,
            reason: "u did not factor completely within budget".into(),
        });
    }
    let fub = factor(&ub_direct, budget);
    if !fub.is_complete() {
        return Ok(EmitOutcome::Unverifiable {
            u,
            reason: "u + B did not factor completely within budget".into(),
        });
    }
    let dku = divisor_count_coprime(&fu, &t.k_reduced)?;
    let dkub = divisor_count_coprime(&fub, &t.k_reduced)?;
    if dku != dkub {
        return Err(PipelineError::DivisorCountMismatch {
            u,
            dku,
            dkub,
        });
    }

    // Cross-check by multiplicativity over the pairwise-coprime factors of u.
    let f_bpart = factor(&state.b_part(n, m, n), budget);
    let rm_exp = (&state.dk_ban[m] - BigUint::one())
        .to_u32()
        .expect("modest exponent");
    let f_rm = Factorization {
        value: state.r[m].clone(),
        factors: if rm_exp == 0 {
            vec![]
        } else {
            vec![(BigUint::from(state.aux_primes[m]), rm_exp)]
        },
        status: FactorStatus::Complete,
    };
    let f_form = factor(&state.f_eval(m, &xv), budget);
    if f_bpart.is_complete() && f_rm.is_complete() && f_form.is_complete() {
        let product = divisor_count_coprime(&f_bpart, &t.k_reduced)?
            * divisor_count_coprime(&f_rm, &t.k_reduced)?
            * divisor_count_coprime(&f_form, &t.k_reduced)?;
        if product != dku {
            return Err(PipelineError::InvariantViolation(format!(
                "multiplicativity cross-check failed: {product} != {dku}"
            )));
        }
    }

    let mut confidence = Confidence::Deterministic;
    for (p, _) in fu.factors.iter().chain(&fub.factors) {
        let c = crate::arith::check_prime(p);
        if !c.probable_prime {
            return Err(PipelineError::InvariantViolation(format!(
                "stored factor {p} is not prime"
            )));
        }
        if let Confidence::Probabilistic { .. } = c.confidence {
            confidence = c.confidence;
        }
    }

    Ok(EmitOutcome::Certified(SolutionCertificate {
        schema_version: crate::SCHEMA_VERSION,
        m,
        n,
        x,
        u,
        b: t.b.clone(),
        k: state.cert.params.k.clone(),
        factor_u: fu.factors,
        factor_ub: fub.factors,
        confidence,
        dk_value: dku,
    }))
}

// ---------------------------------------------------------------------------
// Sieve-hypothesis admissibility
// ---------------------------------------------------------------------------

/// One linear form a·n + b.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveForm {
    #[serde(with = "ser::bigint_dec")]
    pub a: BigInt,
    #[serde(with = "ser::bigint_dec")]
    pub b: BigInt,
}

/// A system of linear forms a_i·n + b_i to be screened against the
/// hypotheses of the dimension-g sieve bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveForms {
    pub forms: Vec<SieveForm>,
}

impl SieveForms {
    pub fn new(pairs: impl IntoIterator<Item = (BigInt, BigInt)>) -> Self {
        SieveForms {
            forms: pairs
                .into_iter()
                .map(|(a, b)| SieveForm { a, b })
                .collect(),
        }
    }

    pub fn g(&self) -> usize {
        self.forms.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub g: usize,
    /// ∏ a_i · ∏_{t<s} (a_t·b_s − a_s·b_t) ≠ 0.
    pub discriminant_nonzero: bool,
    /// A prime p with p | ∏(a_i·n + b_i) for every integer n, if one exists.
    /// Only p ≤ g can have this property: each form kills at most one
    /// residue class mod p, so p > g leaves some class uncovered.
    pub fixed_prime: Option<u64>,
    pub admissible: bool,
    /// Sieve constants the density bound would be instantiated with.
    pub sieve_dimension: u64,
    pub sieve_prime_factor_bound: u64,
}

pub fn check_sieve_admissibility(forms: &SieveForms) -> AdmissibilityReport {
    let g = forms.g();
    let mut disc = BigInt::one();
    for f in &forms.forms {
        disc *= &f.a;
    }
    for (t, ft) in forms.forms.iter().enumerate() {
        for fs in forms.forms.iter().skip(t + 1) {
            disc *= &ft.a * &fs.b - &fs.a * &ft.b;
        }
    }
    let discriminant_nonzero = !disc.is_zero();

    let mut fixed_prime = None;
    'primes: for &p in small_primes().iter().take_while(|&&p| p <= g as u64) {
        let pb = BigInt::from(p);
        for residue in 0..p {
            let nv = BigInt::from(residue);
            let hits = forms
                .forms
                .iter()
                .any(|f| (&f.a * &nv + &f.b).mod_floor(&pb).is_zero());
            if !hits {
                continue 'primes;
            }
        }
        fixed_prime = Some(p);
        break;
    }

    AdmissibilityReport {
        g,
        discriminant_nonzero,
        fixed_prime,
        admissible: discriminant_nonzero && fixed_prime.is_none(),
        sieve_dimension: 7,
        sieve_prime_factor_bound: 27,
    }
}

/// Assemble a two-form sieve system from a pipeline pair, in the variable of
/// the scan: forms coefficient·x + constant for indices m and n.
pub fn sieve_forms_from_pipeline(state: &PipelineState, m: usize, n: usize) -> SieveForms {
    SieveForms::new([m, n].iter().map(|&i| {
        (
            BigInt::from(state.coefficient(i).clone()),
            BigInt::from(state.y[i].clone()),
        )
    }))
}
