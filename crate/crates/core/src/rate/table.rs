use std::fmt;

use rayon::prelude::*;

use super::hashing_rate_unchecked;
use crate::error::{domain, Error, Result};
use crate::numerics::log2_binomial;
use crate::state::{for_each_split, outcome_log_weight, BlockOutcome, SourceState};

/// What the parties do after measuring `(level, a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecisionPolicy {
    /// `a + b = level`: a maximally entangled state of rank `C(level, a)`.
    Terminal,
    /// `a = 0` or `b = 0` with `a + b < level`: nothing to distill.
    Separable,
    /// One-way hashing beats bisection.
    Hash,
    /// Bisect and measure both halves.
    Split,
}

impl fmt::Display for DecisionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DecisionPolicy::Terminal => "TERMINAL",
            DecisionPolicy::Separable => "SEPARABLE",
            DecisionPolicy::Hash => "HASH",
            DecisionPolicy::Split => "SPLIT",
        };
        f.write_str(s)
    }
}

/// Which branches the dynamic program may choose from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    HashingAndBisection,
    BisectionOnly,
}

impl Strategy {
    pub fn from_no_hashing(no_hashing: bool) -> Self {
        if no_hashing {
            Strategy::BisectionOnly
        } else {
            Strategy::HashingAndBisection
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    /// Optimal yield in ebits per block.
    pub rate: f64,
    pub decision: DecisionPolicy,
}

#[derive(Clone, Debug)]
struct Level {
    size: usize,
    entries: Vec<Entry>,
}

impl Level {
    fn index(size: usize, a: usize, b: usize) -> usize {
        a * (size + 1) + b
    }

    fn get(&self, a: usize, b: usize) -> Entry {
        self.entries[Self::index(self.size, a, b)]
    }
}

/// Optimal per-block rates for every `(level, a, b)` with `level` in
/// `1, 2, 4, ..., max_level`.
///
/// The table depends only on the block structure, not on the source: the
/// post-measurement state for `(level, a, b)` is the same for every `p` and
/// `alpha2`. Levels are filled bottom-up and each level only reads the one
/// below it, so a level's entries are computed in parallel.
#[derive(Clone, Debug)]
pub struct RateTable {
    max_level: usize,
    strategy: Strategy,
    levels: Vec<Level>,
}

/// One reachable state of an extracted policy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolicyEntry {
    pub outcome: BlockOutcome,
    pub decision: DecisionPolicy,
    pub rate: f64,
}

impl RateTable {
    pub fn build(max_level: usize, strategy: Strategy) -> Result<Self> {
        crate::check_block_size(max_level, crate::MAX_BLOCK)?;
        let mut levels: Vec<Level> = Vec::new();
        let mut size = 1;
        while size <= max_level {
            let level = build_level(size, levels.last(), strategy);
            levels.push(level);
            size *= 2;
        }
        Ok(RateTable {
            max_level,
            strategy,
            levels,
        })
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    fn level(&self, size: usize) -> Result<&Level> {
        if size == 0 || !size.is_power_of_two() {
            return Err(Error::BlockSize(size, "not a power of two"));
        }
        if size > self.max_level {
            return Err(Error::BlockSize(
                size,
                "above the table's first-measurement level",
            ));
        }
        Ok(&self.levels[size.trailing_zeros() as usize])
    }

    pub fn entry(&self, level: usize, a: usize, b: usize) -> Result<Entry> {
        let table = self.level(level)?;
        if a + b > level {
            return domain(format!("outcome ({level},{a},{b}) has a+b > n"));
        }
        Ok(table.get(a, b))
    }

    /// Optimal ebits per block after measuring `(level, a, b)`.
    pub fn rate(&self, level: usize, a: usize, b: usize) -> Result<f64> {
        self.entry(level, a, b).map(|e| e.rate)
    }

    pub fn decision(&self, level: usize, a: usize, b: usize) -> Result<DecisionPolicy> {
        self.entry(level, a, b).map(|e| e.decision)
    }

    /// Expected ebits per pair when the first measurement is made on a block
    /// of `n` pairs of `source`, `n <= max_level`.
    pub fn expected_rate_at(&self, source: &SourceState, n: usize) -> Result<f64> {
        let level = self.level(n)?;
        let mut total = 0.0;
        for a in 0..=n {
            for b in 0..=n - a {
                let weight = outcome_log_weight(source, n, a, b);
                if !weight.is_zero() {
                    total += weight.value() * level.get(a, b).rate;
                }
            }
        }
        Ok(total / n as f64)
    }

    /// [`Self::expected_rate_at`] for the full table size.
    pub fn expected_rate(&self, source: &SourceState) -> f64 {
        self.expected_rate_at(source, self.max_level)
            .unwrap_or(f64::NAN)
    }

    /// [`Self::expected_rate_at`] with outcome probabilities computed by the
    /// exact rational backend (`n <= 16`).
    pub fn expected_rate_exact_at(
        &self,
        p: &num_rational::BigRational,
        alpha2: &num_rational::BigRational,
        n: usize,
    ) -> Result<f64> {
        let level = self.level(n)?;
        let mut total = 0.0;
        for a in 0..=n {
            for b in 0..=n - a {
                let weight = crate::numerics::exact::exact_outcome_probability(p, alpha2, n, a, b)?;
                total += weight.to_f64() * level.get(a, b).rate;
            }
        }
        Ok(total / n as f64)
    }

    /// The states reachable from a first measurement on `max_level` pairs of
    /// `source` when the table's decisions are followed, ordered by level
    /// (descending), then `a`, then `b`.
    pub fn extract_policy(&self, source: &SourceState) -> Vec<PolicyEntry> {
        let mut reachable: Vec<Vec<bool>> = self
            .levels
            .iter()
            .map(|l| vec![false; (l.size + 1) * (l.size + 1)])
            .collect();
        let top = self.levels.len() - 1;
        let n = self.max_level;
        for a in 0..=n {
            for b in 0..=n - a {
                if !outcome_log_weight(source, n, a, b).is_zero() {
                    reachable[top][Level::index(n, a, b)] = true;
                }
            }
        }
        let mut out = Vec::new();
        for depth in (0..=top).rev() {
            let level = &self.levels[depth];
            let size = level.size;
            for a in 0..=size {
                for b in 0..=size - a {
                    if !reachable[depth][Level::index(size, a, b)] {
                        continue;
                    }
                    let entry = level.get(a, b);
                    out.push(PolicyEntry {
                        outcome: BlockOutcome { n: size, a, b },
                        decision: entry.decision,
                        rate: entry.rate,
                    });
                    if entry.decision == DecisionPolicy::Split {
                        let half = size / 2;
                        for_each_split(size, a, b, |s, prob| {
                            if prob > 0.0 {
                                reachable[depth - 1][Level::index(half, s.left_a, s.left_b)] = true;
                                reachable[depth - 1][Level::index(half, s.right_a, s.right_b)] =
                                    true;
                            }
                        });
                    }
                }
            }
        }
        out
    }
}

fn terminal_or_separable(size: usize, a: usize, b: usize) -> Option<Entry> {
    if a + b == size {
        let rate = log2_binomial(size, a).unwrap_or(f64::NAN);
        return Some(Entry {
            rate,
            decision: DecisionPolicy::Terminal,
        });
    }
    if a == 0 || b == 0 {
        return Some(Entry {
            rate: 0.0,
            decision: DecisionPolicy::Separable,
        });
    }
    None
}

fn compute_entry(
    size: usize,
    a: usize,
    b: usize,
    below: Option<&Level>,
    strategy: Strategy,
) -> Entry {
    if let Some(entry) = terminal_or_separable(size, a, b) {
        return entry;
    }
    // a, b >= 1 and a + b < size, so size >= 4 and the level below exists.
    let below = below.expect("non-trivial states only occur above level 2");
    let mut split_rate = 0.0;
    for_each_split(size, a, b, |s, prob| {
        split_rate +=
            prob * (below.get(s.left_a, s.left_b).rate + below.get(s.right_a, s.right_b).rate);
    });
    let decision = match strategy {
        Strategy::HashingAndBisection if hashing_rate_unchecked(size, a, b) > split_rate => {
            DecisionPolicy::Hash
        }
        _ => DecisionPolicy::Split,
    };
    let rate = match decision {
        DecisionPolicy::Hash => hashing_rate_unchecked(size, a, b),
        _ => split_rate,
    };
    Entry {
        rate: rate.max(0.0),
        decision,
    }
}

fn build_level(size: usize, below: Option<&Level>, strategy: Strategy) -> Level {
    let width = size + 1;
    let placeholder = Entry {
        rate: f64::NAN,
        decision: DecisionPolicy::Separable,
    };
    // Only canonical states a <= b are computed; the mirror is copied so the
    // table is exactly symmetric.
    let canonical: Vec<(usize, usize, Entry)> = (0..=size / 2)
        .into_par_iter()
        .flat_map_iter(|a| {
            (a..=size - a).map(move |b| (a, b, compute_entry(size, a, b, below, strategy)))
        })
        .collect();
    let mut entries = vec![placeholder; width * width];
    for (a, b, entry) in canonical {
        entries[Level::index(size, a, b)] = entry;
        entries[Level::index(size, b, a)] = entry;
    }
    Level { size, entries }
}
