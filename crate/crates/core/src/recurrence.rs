//! Two-copy protocols: measure the parity of each party's two qubits.
//!
//! Both parties finding odd parity leaves a Bell pair (probability `p^2/2`).
//! Both finding even parity (probability `p^2/2 + (1-p)^2`) leaves one pair of
//! the same family with `p' = p^2 / (p^2 + 2(1-p)^2)`, which the improved
//! protocol feeds back into the next round.

use crate::error::{domain, Result};
use crate::numerics::PROB_SLACK;

/// Hard stop on the number of rounds; the surviving weight halves each round
/// at least, so this is never reached for any tolerance above `2^-2000`.
const MAX_ROUNDS: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecurrenceState {
    pub p: f64,
    pub depth: usize,
}

impl RecurrenceState {
    pub fn new(p: f64) -> Result<Self> {
        Ok(RecurrenceState {
            p: check_p(p)?,
            depth: 0,
        })
    }

    pub fn next(self) -> Self {
        RecurrenceState {
            p: two_copy_map_unchecked(self.p),
            depth: self.depth + 1,
        }
    }
}

fn check_p(p: f64) -> Result<f64> {
    if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&p) {
        return domain(format!("p = {p} outside [0, 1]"));
    }
    Ok(p.clamp(0.0, 1.0))
}

fn two_copy_map_unchecked(p: f64) -> f64 {
    let q = 1.0 - p;
    let denom = p * p + 2.0 * q * q;
    // denom > 0 on [0, 1]
    p * p / denom
}

/// `p' = p^2 / (p^2 + 2(1-p)^2)`.
pub fn two_copy_map(p: f64) -> Result<f64> {
    Ok(two_copy_map_unchecked(check_p(p)?))
}

/// Probability that both parties find odd parity: one Bell pair out.
pub fn success_probability(p: f64) -> f64 {
    p * p / 2.0
}

/// Probability that both find even parity: one pair of the `p'` state out.
pub fn survival_probability(p: f64) -> f64 {
    p * p / 2.0 + (1.0 - p) * (1.0 - p)
}

/// One round, non-Bell outcomes discarded: `p^2 / 4` ebits per pair.
pub fn original_two_copy_rate(p: f64) -> Result<f64> {
    let p = check_p(p)?;
    Ok(success_probability(p) / 2.0)
}

/// Rate of the iterated protocol, solving `R(p) = [p^2/2 + s(p) R(p')] / 2`.
///
/// The `p` sequence is iterated forward until the weight carried into the
/// remaining rounds (bounded by one ebit per pair) falls below
/// `tail_tolerance`, then the recursion is unwound with a zero tail. The
/// result is a lower bound within `tail_tolerance` of the limit.
pub fn improved_recurrence_rate(p: f64, tail_tolerance: f64) -> Result<f64> {
    let p = check_p(p)?;
    if tail_tolerance.is_nan() || tail_tolerance <= 0.0 {
        return domain(format!(
            "tail tolerance must be positive, got {tail_tolerance}"
        ));
    }
    let mut rounds = Vec::new();
    let mut state = RecurrenceState { p, depth: 0 };
    let mut carried = 1.0;
    while carried >= tail_tolerance && state.depth < MAX_ROUNDS {
        rounds.push(state.p);
        carried *= survival_probability(state.p) / 2.0;
        state = state.next();
    }
    let rate = rounds.iter().rev().fold(0.0, |tail, &p| {
        (success_probability(p) + survival_probability(p) * tail) / 2.0
    });
    Ok(rate)
}
