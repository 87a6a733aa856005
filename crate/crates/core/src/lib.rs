//! Constructive machinery for coincidences of restricted divisor functions.
//!
//! `d_k(n)` counts the divisors of `n` that are coprime to `k` (so `d_1` is
//! the ordinary divisor count). This crate builds explicit integer families
//! `a_0..a_{N-1}` whose pairwise differences divide their gcds and whose
//! `d_k`-products match ([`lemma`]), manufactures verified solutions `u` of
//! `d_k(u) = d_k(u+B)` from such a family ([`pipeline`]), and cross-checks
//! everything against an independent brute-force scanner ([`scan`]).
//!
//! All certificate types serialize to JSON with every integer rendered as a
//! decimal string, so third-party tooling can re-verify without precision
//! loss.

pub mod arith;
pub mod budget;
pub mod lemma;
pub mod pipeline;
pub mod scan;
pub mod ser;

pub use budget::FactorBudget;

/// Version stamp embedded in every serialized artifact.
pub const SCHEMA_VERSION: u32 = 1;
