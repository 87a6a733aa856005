use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::ArithError;
use crate::ser;

/// One congruence `x = residue (mod modulus)`. Residues may be negative;
/// they are reduced into `[0, modulus)` when solving.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Congruence {
    #[serde(with = "ser::bigint_dec")]
    pub residue: BigInt,
    #[serde(with = "ser::biguint_dec")]
    pub modulus: BigUint,
}

impl Congruence {
    pub fn new(residue: impl Into<BigInt>, modulus: impl Into<BigUint>) -> Self {
        Congruence {
            residue: residue.into(),
            modulus: modulus.into(),
        }
    }
}

/// Simultaneous congruence system with pairwise coprime moduli (checked at
/// solve time, not assumed).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrtSystem {
    pub congruences: Vec<Congruence>,
}

/// Least nonnegative solution of the system together with the combined
/// modulus (the product of all moduli).
pub fn crt_solve(system: &CrtSystem) -> Result<(BigUint, BigUint), ArithError> {
    if system.congruences.is_empty() {
        return Err(ArithError::EmptySystem);
    }
    for (i, a) in system.congruences.iter().enumerate() {
        for (j, b) in system.congruences.iter().enumerate().skip(i + 1) {
            let g = a.modulus.gcd(&b.modulus);
            if !g.is_one() {
                return Err(ArithError::NonCoprimeModuli(i, j, g));
            }
        }
    }

    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for c in &system.congruences {
        let modulus = BigInt::from_biguint(Sign::Plus, c.modulus.clone());
        let r = c.residue.mod_floor(&modulus);
        // Solve x + m*t = r (mod modulus).
        let inv = mod_inverse(&m, &modulus).expect("pairwise coprimality checked above");
        let t = ((&r - &x) * inv).mod_floor(&modulus);
        x += &m * t;
        m *= modulus;
    }
    let x = x.mod_floor(&m);
    Ok((
        x.to_biguint().expect("mod_floor yields nonnegative"),
        m.to_biguint().expect("moduli positive"),
    ))
}

/// Inverse of `a` modulo `m` via extended Euclid, if `gcd(a, m) = 1`.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(m);
    let (mut r0, mut r1) = (m.clone(), a);
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        (r0, r1) = (r1.clone(), &r0 - &q * &r1);
        (s0, s1) = (s1.clone(), &s0 - &q * &s1);
    }
    if r0.abs().is_one() {
        Some((s0 * r0.signum()).mod_floor(m))
    } else {
        None
    }
}
