//! Monte Carlo simulation of the measurement cascade under a fixed policy.
//!
//! Each trial draws the first outcome, then follows the table's decision at
//! every state: terminal states credit `log2 C(level, a)`, hashed states credit
//! their coherent information (the asymptotic hashing yield), and split states
//! draw the two half-block outcomes and recurse.
//!
//! Trial `i` uses its own ChaCha stream `i` under the caller's seed, so the
//! estimate does not depend on how trials are spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::log2_binomial;
use crate::rate::{hashing_rate, DecisionPolicy, RateTable, Strategy};
use crate::state::{sample_outcome, sample_split, BlockOutcome, SourceState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceStep {
    pub outcome: BlockOutcome,
    pub decision: DecisionPolicy,
    /// Ebits credited at this state (zero for splits).
    pub credited: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    /// Total ebits from one block.
    pub yield_ebits: f64,
    pub decision_trace: Option<Vec<TraceStep>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateReport {
    /// Ebits per pair.
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Simulates one `n`-pair block. `policy` must cover level `n`.
pub fn simulate_block<R: Rng + ?Sized>(
    source: &SourceState,
    n: usize,
    policy: &RateTable,
    rng: &mut R,
    record_trace: bool,
) -> Result<TrialResult> {
    if n == 0 || !n.is_power_of_two() || n > policy.max_level() {
        return Err(Error::PolicyMismatch(format!(
            "block of {n} pairs, policy covers powers of two up to {}",
            policy.max_level()
        )));
    }
    let mut trace = record_trace.then(Vec::new);
    let first = sample_outcome(source, n, rng);
    let yield_ebits = follow(first, policy, rng, &mut trace)?;
    Ok(TrialResult {
        yield_ebits,
        decision_trace: trace,
    })
}

fn follow<R: Rng + ?Sized>(
    state: BlockOutcome,
    policy: &RateTable,
    rng: &mut R,
    trace: &mut Option<Vec<TraceStep>>,
) -> Result<f64> {
    let BlockOutcome { n, a, b } = state;
    let decision = policy.decision(n, a, b)?;
    let credited = match decision {
        DecisionPolicy::Terminal => log2_binomial(n, a)?,
        DecisionPolicy::Separable | DecisionPolicy::Split => 0.0,
        DecisionPolicy::Hash => hashing_rate(n, a, b)?,
    };
    if let Some(steps) = trace.as_mut() {
        steps.push(TraceStep {
            outcome: state,
            decision,
            credited,
        });
    }
    if decision != DecisionPolicy::Split {
        return Ok(credited);
    }
    let split = sample_split(n, a, b, rng)?;
    let half = n / 2;
    let left = follow(split.left(half), policy, rng, trace)?;
    let right = follow(split.right(half), policy, rng, trace)?;
    Ok(left + right)
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Estimates the protocol rate (ebits per pair) from `trials` simulated blocks.
pub fn estimate_rate(
    source: &SourceState,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<EstimateReport> {
    crate::check_block_size(n, crate::DEFAULT_MAX_BLOCK)?;
    let table = RateTable::build(n, Strategy::HashingAndBisection)?;
    estimate_rate_with(&table, source, n, trials, seed)
}

/// [`estimate_rate`] under an existing policy table. Runs on the current
/// rayon pool.
pub fn estimate_rate_with(
    policy: &RateTable,
    source: &SourceState,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<EstimateReport> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let yields: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            simulate_block(source, n, policy, &mut rng, false).map(|t| t.yield_ebits / n as f64)
        })
        .collect::<Result<_>>()?;
    let count = trials as f64;
    let mean = yields.iter().sum::<f64>() / count;
    let stderr = if trials > 1 {
        let var = yields.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    Ok(EstimateReport {
        mean,
        stderr,
        trials,
        seed,
    })
}
