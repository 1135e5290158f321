//! Distillation rates for the bisection + one-way hashing purification protocol.
//!
//! The source family is `rho = p |psi><psi| + (1 - p) |00><00|` with
//! `|psi> = alpha |10> + beta |01>`. Both parties measure the Hamming weight of
//! their half of an `n`-pair block, then either hash the resulting state or
//! bisect the block and measure again. [`rate::RateTable`] holds the optimal
//! choice for every reachable `(level, a, b)`.
//!
//! Modules:
//! - [`numerics`]: log-space binomials, entropies, and an exact rational backend.
//! - [`state`]: the source family, outcome and split distributions, samplers,
//!   and a dense-matrix oracle for small blocks.
//! - [`rate`]: the dynamic program and closed-form rates.
//! - [`recurrence`]: the two-copy recurrence protocols.
//! - [`channel`]: amplitude damping, the Q2 lower bound and the REE curve.
//! - [`montecarlo`]: cascade simulation under an extracted policy.
//! - [`report`]: deterministic CSV and text output.

pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod numerics;
pub mod rate;
pub mod recurrence;
pub mod report;
pub mod state;

pub use error::{Error, Result};
pub use rate::{DecisionPolicy, RateTable, Strategy};
pub use state::{BlockOutcome, SourceState, SplitOutcome};

/// Largest block size accepted without an explicit override.
pub const DEFAULT_MAX_BLOCK: usize = 128;

/// Hard ceiling on block sizes, set by the log-factorial table.
pub const MAX_BLOCK: usize = 4096;

/// Checks that `n` is a power of two in `1..=limit`.
pub fn check_block_size(n: usize, limit: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::BlockSize(n, "not a power of two"));
    }
    if n > limit {
        return Err(Error::BlockSize(n, "exceeds the supported maximum"));
    }
    Ok(())
}
