//! Combinatorial and entropy primitives.
//!
//! Everything internal works in natural logs; the `*_bits` helpers and the
//! entropy functions return base-2 values (ebits).

use std::f64::consts::LN_2;
use std::ops::{Add, Div, Mul};
use std::sync::OnceLock;

use crate::error::{domain, Result};
use crate::MAX_BLOCK;

pub mod exact;

pub use exact::ExactProbability;

/// Slack allowed on probabilities that should lie in `[0, 1]`.
pub const PROB_SLACK: f64 = 1e-12;

/// A non-negative real stored as its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogWeight(f64);

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight(f64::NEG_INFINITY);
    pub const ONE: LogWeight = LogWeight(0.0);

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan());
        LogWeight(ln)
    }

    /// Panics in debug builds on negative input.
    pub fn from_value(x: f64) -> Self {
        debug_assert!(x >= 0.0, "negative weight {x}");
        LogWeight(x.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// `self^k`, with `0^0 = 1`.
    pub fn powi(self, k: u32) -> Self {
        if k == 0 {
            LogWeight::ONE
        } else {
            LogWeight(self.0 * k as f64)
        }
    }
}

impl Add for LogWeight {
    type Output = LogWeight;

    fn add(self, rhs: LogWeight) -> LogWeight {
        let (hi, lo) = if self.0 >= rhs.0 {
            (self.0, rhs.0)
        } else {
            (rhs.0, self.0)
        };
        if lo == f64::NEG_INFINITY {
            return LogWeight(hi);
        }
        LogWeight(hi + (lo - hi).exp().ln_1p())
    }
}

impl Mul for LogWeight {
    type Output = LogWeight;

    fn mul(self, rhs: LogWeight) -> LogWeight {
        if self.is_zero() || rhs.is_zero() {
            return LogWeight::ZERO;
        }
        LogWeight(self.0 + rhs.0)
    }
}

impl Div for LogWeight {
    type Output = LogWeight;

    fn div(self, rhs: LogWeight) -> LogWeight {
        debug_assert!(!rhs.is_zero(), "division by a zero weight");
        if self.is_zero() {
            return LogWeight::ZERO;
        }
        LogWeight(self.0 - rhs.0)
    }
}

impl std::iter::Sum for LogWeight {
    fn sum<I: Iterator<Item = LogWeight>>(iter: I) -> LogWeight {
        iter.fold(LogWeight::ZERO, |acc, w| acc + w)
    }
}

fn log_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Neumaier-compensated running sum of ln k.
        let mut table = Vec::with_capacity(MAX_BLOCK + 1);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        table.push(0.0);
        for k in 1..=MAX_BLOCK {
            let term = (k as f64).ln();
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
            table.push(sum + comp);
        }
        table
    })
}

/// Natural log of `C(n, k)`.
pub fn log_binomial(n: usize, k: usize) -> Result<f64> {
    if k > n {
        return domain(format!("binomial C({n}, {k}) with k > n"));
    }
    if n > MAX_BLOCK {
        return domain(format!(
            "binomial C({n}, {k}) beyond the table limit {MAX_BLOCK}"
        ));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    let lf = log_factorials();
    Ok(lf[n] - lf[k] - lf[n - k])
}

/// `log2 C(n, k)`.
pub fn log2_binomial(n: usize, k: usize) -> Result<f64> {
    Ok(ln_to_bits(log_binomial(n, k)?))
}

pub fn ln_to_bits(x: f64) -> f64 {
    x / LN_2
}

/// Binary entropy in bits, `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&x) {
        return domain(format!("binary entropy argument {x} outside [0, 1]"));
    }
    let x = x.clamp(0.0, 1.0);
    Ok(xlog2x_neg(x) + xlog2x_neg(1.0 - x))
}

/// `-x log2 x` with the continuous extension at 0.
pub(crate) fn xlog2x_neg(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// `Y(x) = (1 / (x 2^x)) sum_k C(x, k) log2 C(x, k)`: the mean ebits per pair
/// obtained by measuring Hamming weights on `x` perfect pairs.
pub fn y_function(x: usize) -> Result<f64> {
    if x == 0 || !x.is_power_of_two() || x > MAX_BLOCK {
        return domain(format!("Y({x}) needs a power of two in 1..={MAX_BLOCK}"));
    }
    let shift = x as f64 * LN_2;
    let mut total = 0.0;
    for k in 0..=x {
        let lc = log_binomial(x, k)?;
        total += (lc - shift).exp() * ln_to_bits(lc);
    }
    Ok(total / x as f64)
}
