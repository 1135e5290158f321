//! Rates of the bisection + one-way hashing protocol.
//!
//! All per-block quantities are in ebits per block; the `*_rate(source, n)`
//! functions divide by `n` and report ebits per pair.

mod table;

pub use table::{DecisionPolicy, Entry, PolicyEntry, RateTable, Strategy};

use crate::error::Result;
use crate::numerics::{binary_entropy, log2_binomial, y_function};
use crate::state::{BlockOutcome, SourceState};
use crate::DEFAULT_MAX_BLOCK;

/// `S(A) = log2 C(n, a)`: Alice holds a uniform mixture of weight-`a` strings.
pub fn entropy_a(n: usize, a: usize) -> Result<f64> {
    log2_binomial(n, a)
}

/// `S(B) = log2 C(n, b)`.
pub fn entropy_b(n: usize, b: usize) -> Result<f64> {
    log2_binomial(n, b)
}

/// `S(AB) = log2 C(n, a+b)`: a uniform mixture of that many orthogonal pure states.
pub fn entropy_ab(n: usize, a: usize, b: usize) -> Result<f64> {
    BlockOutcome::new(n, a, b)?;
    log2_binomial(n, a + b)
}

/// Coherent information of the post-measurement state `(n, a, b)`, taking
/// the better of the two communication directions. Not clamped; may be
/// negative.
pub fn hashing_rate(n: usize, a: usize, b: usize) -> Result<f64> {
    BlockOutcome::new(n, a, b)?;
    Ok(hashing_rate_unchecked(n, a, b))
}

pub(crate) fn hashing_rate_unchecked(n: usize, a: usize, b: usize) -> f64 {
    let sa = log2_binomial(n, a).unwrap_or(f64::NAN);
    let sb = log2_binomial(n, b).unwrap_or(f64::NAN);
    let sab = log2_binomial(n, n - a - b).unwrap_or(f64::NAN);
    sa.max(sb) - sab
}

/// Optimal ebits per block after the outcome `(level, a, b)`, read from `memo`.
pub fn block_rate(level: usize, a: usize, b: usize, memo: &RateTable) -> Result<f64> {
    memo.rate(level, a, b)
}

/// Ebits per pair of the full protocol with the first measurement on `n` pairs.
pub fn protocol_rate(source: &SourceState, n: usize) -> Result<f64> {
    rate_with(source, n, Strategy::HashingAndBisection)
}

/// Ebits per pair when only bisection is used.
pub fn bisection_only_rate(source: &SourceState, n: usize) -> Result<f64> {
    rate_with(source, n, Strategy::BisectionOnly)
}

fn rate_with(source: &SourceState, n: usize, strategy: Strategy) -> Result<f64> {
    crate::check_block_size(n, DEFAULT_MAX_BLOCK)?;
    Ok(RateTable::build(n, strategy)?.expected_rate(source))
}

/// Closed form of the bisection-only rate for the Bell-state mixture:
/// `sum_{l=1}^{m} p^(2^l) [Y(2^l) - Y(2^(l-1))]` with `n = 2^m`.
pub fn closed_form_bisection_rate(p: f64, n: usize) -> Result<f64> {
    crate::check_block_size(n, crate::MAX_BLOCK)?;
    SourceState::symmetric(p)?;
    let mut total = 0.0;
    let mut size = 2;
    let mut previous = y_function(1)?;
    while size <= n {
        let current = y_function(size)?;
        total += p.powi(size as i32) * (current - previous);
        previous = current;
        size *= 2;
    }
    Ok(total)
}

/// One-way hashing applied directly to the Bell-state mixture:
/// `max{h(p/2) - h(p), 0}`.
pub fn raw_hashing_rate(p: f64) -> Result<f64> {
    SourceState::symmetric(p)?;
    Ok((binary_entropy(p / 2.0)? - binary_entropy(p)?).max(0.0))
}

/// Reachable states and decisions for a first measurement on `n` pairs.
pub fn extract_policy(source: &SourceState, n: usize) -> Result<Vec<PolicyEntry>> {
    crate::check_block_size(n, DEFAULT_MAX_BLOCK)?;
    Ok(RateTable::build(n, Strategy::HashingAndBisection)?.extract_policy(source))
}
