//! The source-state family and its measurement-outcome distributions.
//!
//! Measuring Hamming weights `(a, b)` on an `n`-pair block of
//! `rho = p |psi><psi| + (1 - p) |00><00|` factors as
//! `k = a + b ~ Bin(n, p)` followed by `a ~ Bin(k, alpha2)`. Splitting a
//! measured block and measuring each half gives a distribution over the halves
//! that depends only on `(n, a, b)`; it is a product of two hypergeometric
//! draws, `k_left ~ Hyp(n, k, n/2)` and `a_left ~ Hyp(k, a, k_left)`.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric};

use crate::error::{domain, Error, Result};
use crate::numerics::{log_binomial, LogWeight, PROB_SLACK};

pub mod oracle;

pub use oracle::{brute_force_outcome_probs, OracleOutcome};

/// `rho = p |psi><psi| + (1 - p) |00><00|` with `|psi> = alpha |10> + beta |01>`.
///
/// `alpha2 = |alpha|^2`; `alpha2 = 1/2` is the symmetric Bell-state mixture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceState {
    p: f64,
    alpha2: f64,
}

impl SourceState {
    pub fn new(p: f64, alpha2: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("alpha2", alpha2)] {
            if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&v) {
                return domain(format!("{name} = {v} outside [0, 1]"));
            }
        }
        Ok(SourceState {
            p: p.clamp(0.0, 1.0),
            alpha2: alpha2.clamp(0.0, 1.0),
        })
    }

    /// The Bell-state mixture, `alpha2 = 1/2`.
    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new(p, 0.5)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn beta2(&self) -> f64 {
        1.0 - self.alpha2
    }
}

/// A measurement record: block size `n` and the two Hamming weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockOutcome {
    pub n: usize,
    pub a: usize,
    pub b: usize,
}

impl BlockOutcome {
    pub fn new(n: usize, a: usize, b: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::BlockSize(n, "not a power of two"));
        }
        if a + b > n {
            return domain(format!("outcome ({n},{a},{b}) has a+b > n"));
        }
        Ok(BlockOutcome { n, a, b })
    }

    /// Number of pairs carrying the entangled component.
    pub fn k(&self) -> usize {
        self.a + self.b
    }
}

/// Hamming weights measured on the two halves of a bisected block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SplitOutcome {
    pub left_a: usize,
    pub left_b: usize,
    pub right_a: usize,
    pub right_b: usize,
}

impl SplitOutcome {
    pub fn left(&self, half: usize) -> BlockOutcome {
        BlockOutcome {
            n: half,
            a: self.left_a,
            b: self.left_b,
        }
    }

    pub fn right(&self, half: usize) -> BlockOutcome {
        BlockOutcome {
            n: half,
            a: self.right_a,
            b: self.right_b,
        }
    }
}

fn check_outcome(n: usize, a: usize, b: usize) -> Result<()> {
    BlockOutcome::new(n, a, b).map(|_| ())
}

/// `ln[C(n, a+b) C(a+b, a) 2^-(a+b)]` without argument checks.
pub(crate) fn ln_conditional_weight_unchecked(n: usize, a: usize, b: usize) -> f64 {
    let k = a + b;
    // Callers guarantee a + b <= n <= MAX_BLOCK, so the lookups cannot fail.
    log_binomial(n, k).unwrap_or(f64::NAN) + log_binomial(k, a).unwrap_or(f64::NAN)
        - k as f64 * std::f64::consts::LN_2
}

/// Probability of measuring `(a, b)` given that exactly `a + b` of the `n`
/// pairs carry the entangled component, at `alpha2 = 1/2`:
/// `C(n, a+b) C(a+b, a) 2^-(a+b)`.
pub fn conditional_weight(n: usize, a: usize, b: usize) -> Result<f64> {
    check_outcome(n, a, b)?;
    Ok(ln_conditional_weight_unchecked(n, a, b).exp())
}

/// Probability of the outcome `(a, b)` on an `n`-pair block of `source`.
pub fn outcome_probability(source: &SourceState, n: usize, a: usize, b: usize) -> Result<f64> {
    check_outcome(n, a, b)?;
    Ok(outcome_log_weight(source, n, a, b).value())
}

pub(crate) fn outcome_log_weight(source: &SourceState, n: usize, a: usize, b: usize) -> LogWeight {
    let k = a + b;
    let counts = LogWeight::from_ln(
        log_binomial(n, k).unwrap_or(f64::NAN) + log_binomial(k, a).unwrap_or(f64::NAN),
    );
    counts
        * LogWeight::from_value(source.p).powi(k as u32)
        * LogWeight::from_value(1.0 - source.p).powi((n - k) as u32)
        * LogWeight::from_value(source.alpha2).powi(a as u32)
        * LogWeight::from_value(source.beta2()).powi(b as u32)
}

/// All outcomes of an `n`-pair block with their probabilities, ordered by
/// `(a, b)`. Zero-probability outcomes are included.
pub fn outcome_distribution(source: &SourceState, n: usize) -> Result<Vec<(BlockOutcome, f64)>> {
    crate::check_block_size(n, crate::MAX_BLOCK)?;
    let mut out = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for a in 0..=n {
        for b in 0..=n - a {
            out.push((
                BlockOutcome { n, a, b },
                outcome_log_weight(source, n, a, b).value(),
            ));
        }
    }
    Ok(out)
}

/// Calls `f(split, probability)` for every way the outcome `(n, a, b)` can
/// distribute over the two halves, in increasing `(left_a, left_b)` order.
pub(crate) fn for_each_split(n: usize, a: usize, b: usize, mut f: impl FnMut(SplitOutcome, f64)) {
    let half = n / 2;
    let parent = ln_conditional_weight_unchecked(n, a, b);
    let left_a_min = a.saturating_sub(half);
    let left_a_max = a.min(half);
    for left_a in left_a_min..=left_a_max {
        let left_b_min = (a + b).saturating_sub(left_a + half);
        let left_b_max = b.min(half - left_a);
        for left_b in left_b_min..=left_b_max {
            let (right_a, right_b) = (a - left_a, b - left_b);
            let ln_prob = ln_conditional_weight_unchecked(half, left_a, left_b)
                + ln_conditional_weight_unchecked(half, right_a, right_b)
                - parent;
            f(
                SplitOutcome {
                    left_a,
                    left_b,
                    right_a,
                    right_b,
                },
                ln_prob.exp(),
            );
        }
    }
}

/// Conditional distribution of the half-block outcomes after bisecting a block
/// measured as `(n, a, b)`. Independent of the source parameters.
pub fn split_distribution(n: usize, a: usize, b: usize) -> Result<Vec<(SplitOutcome, f64)>> {
    check_outcome(n, a, b)?;
    if n < 2 {
        return domain("a single pair cannot be split");
    }
    let mut out = Vec::new();
    for_each_split(n, a, b, |s, prob| out.push((s, prob)));
    Ok(out)
}

/// Draws a measurement outcome for an `n`-pair block of `source`.
pub fn sample_outcome<R: Rng + ?Sized>(
    source: &SourceState,
    n: usize,
    rng: &mut R,
) -> BlockOutcome {
    let k = draw_binomial(n as u64, source.p, rng);
    let a = draw_binomial(k, source.alpha2, rng);
    BlockOutcome {
        n,
        a: a as usize,
        b: (k - a) as usize,
    }
}

fn draw_binomial<R: Rng + ?Sized>(trials: u64, success: f64, rng: &mut R) -> u64 {
    if trials == 0 || success <= 0.0 {
        return 0;
    }
    if success >= 1.0 {
        return trials;
    }
    Binomial::new(trials, success)
        .map(|d| d.sample(rng))
        .unwrap_or(0)
}

fn draw_hypergeometric<R: Rng + ?Sized>(
    population: u64,
    successes: u64,
    draws: u64,
    rng: &mut R,
) -> u64 {
    if successes == 0 || draws == 0 {
        return 0;
    }
    if successes == population {
        return draws;
    }
    if draws == population {
        return successes;
    }
    Hypergeometric::new(population, successes, draws)
        .map(|d| d.sample(rng))
        .expect("hypergeometric parameters are consistent")
}

/// Draws the half-block outcomes after bisecting a block measured as `(n, a, b)`.
pub fn sample_split<R: Rng + ?Sized>(
    n: usize,
    a: usize,
    b: usize,
    rng: &mut R,
) -> Result<SplitOutcome> {
    check_outcome(n, a, b)?;
    if n < 2 {
        return domain("a single pair cannot be split");
    }
    let k = (a + b) as u64;
    let left_k = draw_hypergeometric(n as u64, k, (n / 2) as u64, rng);
    let left_a = draw_hypergeometric(k, a as u64, left_k, rng) as usize;
    let left_b = left_k as usize - left_a;
    Ok(SplitOutcome {
        left_a,
        left_b,
        right_a: a - left_a,
        right_b: b - left_b,
    })
}
