use std::sync::OnceLock;

/// Trial division in [`crate::arith::factor`] never needs primes beyond this.
pub const SMALL_PRIME_BOUND: u64 = 1 << 20;

static SMALL_PRIMES: OnceLock<Vec<u64>> = OnceLock::new();

/// All primes below [`SMALL_PRIME_BOUND`], computed once per process.
pub fn small_primes() -> &'static [u64] {
    SMALL_PRIMES.get_or_init(|| sieve(SMALL_PRIME_BOUND))
}

/// The `m` smallest primes in increasing order, `p_1 = 2`.
pub fn first_primes(m: usize) -> Vec<u64> {
    assert!(m >= 1, "first_primes requires m >= 1");
    let cached = small_primes();
    if m <= cached.len() {
        return cached[..m].to_vec();
    }
    // p_m < m (ln m + ln ln m) for m >= 6; pad generously below that.
    let mf = m as f64;
    let mut bound = (mf * (mf.ln() + mf.ln().ln().max(1.0))) as u64 + 16;
    loop {
        let primes = sieve(bound);
        if primes.len() >= m {
            return primes[..m].to_vec();
        }
        bound *= 2;
    }
}

fn sieve(bound: u64) -> Vec<u64> {
    let bound = bound as usize;
    let mut composite = vec![false; bound + 1];
    let mut primes = Vec::new();
    for i in 2..=bound {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= bound {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}
