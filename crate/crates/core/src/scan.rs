//! Brute-force oracle: segmented computation of d_k over integer ranges,
//! counting solutions of d_k(n) = d_k(n+B), and independent re-verification
//! of solution certificates.
//!
//! Nothing here reuses the constructive machinery: the only shared code is
//! the arithmetic kernel, so agreement between this module and the generator
//! is meaningful evidence of correctness.

use crate::arith::{divisor_count_coprime, factor, small_primes, ArithError};
use crate::budget::FactorBudget;
use crate::pipeline::SolutionCertificate;
use crate::SCHEMA_VERSION;
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

/// Hard cap on a single sieve window, in entries (one u64 count plus one u64
/// residual per entry, i.e. 16 bytes each).
pub const MAX_WINDOW: u64 = 1 << 26;

/// Largest range endpoint the segmented sieve supports: residual cofactors
/// are certified prime by trial division up to the small-prime bound, which
/// covers squares up to 2^40.
pub const MAX_SIEVE_HI: u64 = 1 << 40;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("window [{lo}, {hi}) has {got} entries, exceeding the cap of {cap}")]
    WindowTooLarge { lo: u64, hi: u64, got: u64, cap: u64 },
    #[error("invalid range [{lo}, {hi}): require 1 <= lo < hi <= {max}", max = MAX_SIEVE_HI)]
    InvalidRange { lo: u64, hi: u64 },
    #[error("certificate value {value} could not be fully factored within budget; unverifiable")]
    Unverifiable { value: BigUint },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Exact d_k(n) for every n in [lo, hi), by a segmented smallest-prime-factor
/// sieve: each prime p <= sqrt(hi) strikes its multiples and divides out its
/// full power, leaving a residual that is 1 or a single prime > sqrt(hi).
pub fn sieve_dk_window(k: u64, lo: u64, hi: u64) -> Result<Vec<u64>, ScanError> {
    if lo < 1 || lo >= hi || hi > MAX_SIEVE_HI {
        return Err(ScanError::InvalidRange { lo, hi });
    }
    let len = hi - lo;
    if len > MAX_WINDOW {
        return Err(ScanError::WindowTooLarge { lo, hi, got: len, cap: MAX_WINDOW });
    }
    let len = len as usize;
    let mut dk = vec![1u64; len];
    let mut rem: Vec<u64> = (lo..hi).collect();
    let root = (hi - 1).isqrt();
    for &p in small_primes() {
        if p > root {
            break;
        }
        let coprime = !k.is_multiple_of(p);
        let mut m = lo.div_ceil(p) * p;
        while m < hi {
            let i = (m - lo) as usize;
            let mut e = 0u64;
            while rem[i].is_multiple_of(p) {
                rem[i] /= p;
                e += 1;
            }
            if coprime {
                dk[i] *= e + 1;
            }
            m += p;
        }
    }
    for i in 0..len {
        // Residual is prime (> sqrt(hi)) or 1; it contributes a factor 2
        // exactly when it is coprime to k.
        if rem[i] > 1 && !k.is_multiple_of(rem[i]) {
            dk[i] *= 2;
        }
    }
    Ok(dk)
}

/// One row of the descriptive density table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub x: u64,
    pub count: u64,
    /// count * (ln x)^7 / x. Descriptive only: no fitted constant is claimed
    /// and no asymptotic statement is implied.
    pub ratio: f64,
}

/// Outcome of counting solutions of d_k(n) = d_k(n+B) for n <= limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema_version: u32,
    pub k: u64,
    pub b: u64,
    pub limit: u64,
    pub count: u64,
    /// First few solutions found, capped by `sample_cap`.
    pub first_samples: Vec<u64>,
    /// Last few solutions found, capped by `sample_cap`.
    pub last_samples: Vec<u64>,
    /// Cumulative counts at powers of ten (and at the limit itself).
    pub checkpoints: Vec<Checkpoint>,
    pub window_size: u64,
    /// Full solution listing, present only when requested with a cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solutions: Option<Vec<u64>>,
}

impl ScanReport {
    /// CSV rendering of the checkpoint table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_checkpoint,count,ratio\n");
        for c in &self.checkpoints {
            let _ = writeln!(out, "{},{},{}", c.x, c.count, c.ratio);
        }
        out
    }
}

fn density_ratio(count: u64, x: u64) -> f64 {
    let lx = (x as f64).ln();
    count as f64 * lx.powi(7) / x as f64
}

/// Count n <= limit with d_k(n) = d_k(n+B), with default window and sampling.
pub fn count_coincidences(k: u64, b: u64, limit: u64) -> Result<ScanReport, ScanError> {
    count_coincidences_with(k, b, limit, 1 << 16, 10, None)
}

/// Windowed coincidence count. Each window additionally sieves [hi, hi+B) so
/// d_k(n+B) is always available locally; windows are processed in parallel
/// and folded in index order, so the report is deterministic.
///
/// `list_cap`, when set, retains up to that many solutions in the report.
pub fn count_coincidences_with(
    k: u64,
    b: u64,
    limit: u64,
    window_size: u64,
    sample_cap: usize,
    list_cap: Option<usize>,
) -> Result<ScanReport, ScanError> {
    assert!(limit >= 1, "limit must be positive");
    assert!(b >= 1, "shift must be positive");
    let window_size = window_size.max(1);
    let mut windows: Vec<(u64, u64)> = Vec::new();
    let mut lo = 1u64;
    while lo <= limit {
        let hi = lo.saturating_add(window_size).min(limit + 1);
        windows.push((lo, hi));
        lo = hi;
    }
    let per_window: Vec<Result<Vec<u64>, ScanError>> = windows
        .par_iter()
        .map(|&(lo, hi)| {
            let dk = sieve_dk_window(k, lo, hi + b)?;
            let mut sols = Vec::new();
            for n in lo..hi {
                let i = (n - lo) as usize;
                if dk[i] == dk[i + b as usize] {
                    sols.push(n);
                }
            }
            Ok(sols)
        })
        .collect();

    let mut checkpoint_xs: Vec<u64> = Vec::new();
    let mut pow = 10u64;
    while pow < limit {
        checkpoint_xs.push(pow);
        pow = pow.saturating_mul(10);
    }
    checkpoint_xs.push(limit);

    let mut count = 0u64;
    let mut first_samples = Vec::new();
    let mut last = std::collections::VecDeque::new();
    let mut listing = list_cap.map(|_| Vec::new());
    let mut checkpoints: Vec<Checkpoint> = Vec::new();
    let mut cp_idx = 0usize;
    for (w, sols) in per_window.into_iter().enumerate() {
        let sols = sols?;
        let (_, hi) = windows[w];
        for n in sols {
            while cp_idx < checkpoint_xs.len() && checkpoint_xs[cp_idx] < n {
                checkpoints.push(Checkpoint {
                    x: checkpoint_xs[cp_idx],
                    count,
                    ratio: density_ratio(count, checkpoint_xs[cp_idx]),
                });
                cp_idx += 1;
            }
            count += 1;
            if first_samples.len() < sample_cap {
                first_samples.push(n);
            }
            last.push_back(n);
            if last.len() > sample_cap {
                last.pop_front();
            }
            if let Some(list) = listing.as_mut() {
                if list.len() < list_cap.unwrap() {
                    list.push(n);
                }
            }
        }
        // Close out checkpoints that this window has fully covered.
        while cp_idx < checkpoint_xs.len() && checkpoint_xs[cp_idx] < hi {
            checkpoints.push(Checkpoint {
                x: checkpoint_xs[cp_idx],
                count,
                ratio: density_ratio(count, checkpoint_xs[cp_idx]),
            });
            cp_idx += 1;
        }
    }
    while cp_idx < checkpoint_xs.len() {
        checkpoints.push(Checkpoint {
            x: checkpoint_xs[cp_idx],
            count,
            ratio: density_ratio(count, checkpoint_xs[cp_idx]),
        });
        cp_idx += 1;
    }
    Ok(ScanReport {
        schema_version: SCHEMA_VERSION,
        k,
        b,
        limit,
        count,
        first_samples,
        last_samples: last.into_iter().collect(),
        checkpoints,
        window_size,
        solutions: listing,
    })
}

/// Re-check a solution certificate through an independent path: read only
/// (u, B, k), factor u and u + B from scratch, and compare the two divisor
/// counts. Returns `Err(Unverifiable)` if either factorization exhausts the
/// budget, so an unproven claim is never reported as true or false.
pub fn verify_certificate_against_oracle(
    cert: &SolutionCertificate,
    budget: &FactorBudget,
) -> Result<bool, ScanError> {
    let u = &cert.u;
    let ub = u + &cert.b;
    let fu = factor(u, budget);
    let dku = divisor_count_coprime(&fu, &cert.k)
        .map_err(|_| ScanError::Unverifiable { value: u.clone() })?;
    let fub = factor(&ub, budget);
    let dkub = divisor_count_coprime(&fub, &cert.k)
        .map_err(|_| ScanError::Unverifiable { value: ub.clone() })?;
    Ok(dku == dkub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Confidence;
    use num_traits::One;

    #[test]
    fn small_windows_match_hand_counts() {
        assert_eq!(sieve_dk_window(1, 1, 7).unwrap(), vec![1, 2, 2, 3, 2, 4]);
        assert_eq!(sieve_dk_window(2, 1, 5).unwrap(), vec![1, 1, 2, 1]);
        // n = 1 has a single divisor for every k.
        assert_eq!(sieve_dk_window(30, 1, 2).unwrap(), vec![1]);
    }

    #[test]
    fn window_offsets_are_consistent() {
        let whole = sieve_dk_window(6, 1, 1001).unwrap();
        let part = sieve_dk_window(6, 501, 1001).unwrap();
        assert_eq!(&whole[500..], &part[..]);
    }

    #[test]
    fn invalid_windows_rejected() {
        assert!(matches!(
            sieve_dk_window(1, 5, 5),
            Err(ScanError::InvalidRange { .. })
        ));
        assert!(matches!(
            sieve_dk_window(1, 0, 5),
            Err(ScanError::InvalidRange { .. })
        ));
        assert!(matches!(
            sieve_dk_window(1, 1, 2 + MAX_WINDOW),
            Err(ScanError::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn known_coincidences_found() {
        // d(2) = d(3) = 2.
        let r = count_coincidences(1, 1, 10).unwrap();
        assert!(r.first_samples.contains(&2));
        // d(3) = d(5) = 2.
        let r = count_coincidences(1, 2, 10).unwrap();
        assert!(r.first_samples.contains(&3));
        // Odd-divisor counts of 1 and 2 are both 1.
        let r = count_coincidences(2, 1, 10).unwrap();
        assert!(r.first_samples.contains(&1));
    }

    #[test]
    fn report_is_window_independent_and_monotone() {
        let base = count_coincidences_with(1, 1, 5000, 64, 10, Some(10_000)).unwrap();
        for w in [256u64, 1024, 8192] {
            let other = count_coincidences_with(1, 1, 5000, w, 10, Some(10_000)).unwrap();
            assert_eq!(other.count, base.count);
            assert_eq!(other.solutions, base.solutions);
            assert_eq!(other.checkpoints, base.checkpoints);
        }
        let counts: Vec<u64> = base.checkpoints.iter().map(|c| c.count).collect();
        assert!(counts.windows(2).all(|p| p[0] <= p[1]));
        assert_eq!(base.count, base.solutions.as_ref().unwrap().len() as u64);
        assert_eq!(base.checkpoints.last().unwrap().count, base.count);
    }

    #[test]
    fn csv_table_shape() {
        let r = count_coincidences(1, 1, 100).unwrap();
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x_checkpoint,count,ratio"));
        assert_eq!(lines.count(), r.checkpoints.len());
    }

    fn handmade_cert(u: u64) -> SolutionCertificate {
        SolutionCertificate {
            schema_version: SCHEMA_VERSION,
            m: 0,
            n: 1,
            x: 0,
            u: BigUint::from(u),
            b: BigUint::one(),
            k: BigUint::one(),
            factor_u: vec![],
            factor_ub: vec![],
            confidence: Confidence::Deterministic,
            dk_value: BigUint::one(),
        }
    }

    #[test]
    fn oracle_agrees_on_hand_certificates() {
        let budget = FactorBudget::default();
        assert!(verify_certificate_against_oracle(&handmade_cert(2), &budget).unwrap());
        assert!(!verify_certificate_against_oracle(&handmade_cert(3), &budget).unwrap());
    }

    #[test]
    fn oracle_reports_unverifiable_on_budget_exhaustion() {
        // Product of two large primes, far beyond a crippled budget.
        let p = (BigUint::one() << 89u32) - BigUint::one();
        let q = BigUint::from(2u32).pow(107) - BigUint::one();
        let mut cert = handmade_cert(0);
        cert.u = &p * &q;
        let tiny = FactorBudget {
            trial_bound: 100,
            rho_iterations: 16,
            rho_polys: 1,
            seed: 1,
        };
        assert!(matches!(
            verify_certificate_against_oracle(&cert, &tiny),
            Err(ScanError::Unverifiable { .. })
        ));
    }
}
