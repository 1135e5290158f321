//! Amplitude damping, the two-way capacity lower bound built on the protocol,
//! and the relative-entropy upper bound on distillable entanglement.
//!
//! The damping parameter `gamma` is an amplitude: the Kraus operators are
//! `E0 = |0><0| + sqrt(1 - gamma^2) |1><1|` and `E1 = gamma |0><1|`, so the
//! decay probability is `gamma^2`.

use nalgebra::{Matrix2, Matrix4};

use crate::error::{domain, Result};
use crate::numerics::PROB_SLACK;
use crate::rate::{RateTable, Strategy};
use crate::state::SourceState;

mod ree;

pub use ree::{ree_oracle, ree_oracle_with, ree_upper_bound, ReeEstimate, ReeOracleConfig};

/// Points in the coarse scan that seeds the golden-section search.
pub const SEED_GRID_POINTS: usize = 21;

/// Target bracket width of the golden-section search.
pub const SEARCH_TOLERANCE: f64 = 1e-6;

/// Largest first-measurement block used for the capacity bound.
pub const Q2_MAX_BLOCK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeDampingChannel {
    gamma: f64,
}

impl AmplitudeDampingChannel {
    pub fn new(gamma: f64) -> Result<Self> {
        Ok(AmplitudeDampingChannel {
            gamma: unit_interval("gamma", gamma)?,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kraus(&self) -> [Matrix2<f64>; 2] {
        let g = self.gamma;
        [
            Matrix2::new(1.0, 0.0, 0.0, (1.0 - g * g).sqrt()),
            Matrix2::new(0.0, g, 0.0, 0.0),
        ]
    }

    /// Applies the channel to Bob's qubit of a two-qubit density matrix
    /// (basis index `2A + B`).
    pub fn apply_to_bob(&self, rho: &Matrix4<f64>) -> Matrix4<f64> {
        self.kraus().iter().fold(Matrix4::zeros(), |acc, e| {
            let op = Matrix2::identity().kronecker(e);
            let op = Matrix4::from_fn(|i, j| op[(i, j)]);
            acc + op * rho * op.transpose()
        })
    }

    /// The family member produced by sending Bob's half of
    /// `alpha' |10> + beta' |01>` through the channel, `|alpha'|^2 = alpha2_in`.
    pub fn output_state(&self, alpha2_in: f64) -> Result<SourceState> {
        let alpha2_in = unit_interval("alpha2", alpha2_in)?;
        let p = 1.0 - self.gamma * self.gamma * (1.0 - alpha2_in);
        if p <= 0.0 {
            // Fully damped vacuum: no entangled component at all.
            return SourceState::new(0.0, 1.0);
        }
        // Bob's |1> survives with probability 1 - gamma^2; written so that
        // gamma = 0 and gamma = 1 give exact results.
        let alpha2 = if self.gamma == 0.0 {
            alpha2_in
        } else {
            alpha2_in / (alpha2_in + (1.0 - alpha2_in) * (1.0 - self.gamma * self.gamma))
        };
        SourceState::new(p, alpha2.min(1.0))
    }
}

fn unit_interval(name: &str, v: f64) -> Result<f64> {
    if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&v) {
        return domain(format!("{name} = {v} outside [0, 1]"));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// See [`AmplitudeDampingChannel::output_state`].
pub fn channel_output_state(gamma: f64, alpha2_in: f64) -> Result<SourceState> {
    AmplitudeDampingChannel::new(gamma)?.output_state(alpha2_in)
}

/// A point on the capacity lower-bound curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelPoint {
    pub gamma: f64,
    /// Input Schmidt weight `|alpha'|^2` achieving the rate.
    pub best_alpha2: f64,
    /// Ebits per channel use.
    pub rate: f64,
}

/// Maximises `f` on `[lo, hi]` by golden-section search, stopping once the
/// bracket is narrower than `tol`. Returns `(argmax, max)`.
pub fn golden_section_max(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `max_x f(x)` over `[0, 1]`: a uniform scan, then golden-section search in
/// the bracket around the best scan point. Ties in the scan go to the
/// smallest `x`.
pub fn maximize_unit_interval(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let last = SEED_GRID_POINTS - 1;
    let grid: Vec<(f64, f64)> = (0..=last)
        .map(|i| {
            let x = i as f64 / last as f64;
            (x, f(x))
        })
        .collect();
    let (best_i, &(mut best_x, mut best_v)) = grid
        .iter()
        .enumerate()
        .fold(
            None,
            |acc: Option<(usize, &(f64, f64))>, (i, pt)| match acc {
                Some((_, b)) if b.1 >= pt.1 => acc,
                _ => Some((i, pt)),
            },
        )
        .expect("grid is non-empty");
    let lo = grid[best_i.saturating_sub(1)].0;
    let hi = grid[(best_i + 1).min(last)].0;
    let (x, v) = golden_section_max(&f, lo, hi, SEARCH_TOLERANCE);
    if v > best_v {
        best_x = x;
        best_v = v;
    }
    (best_x, best_v)
}

/// Lower bound on the two-way assisted capacity at `gamma`, first measurement
/// on `n` pairs.
pub fn q2_lower_bound(gamma: f64, n: usize) -> Result<ChannelPoint> {
    crate::check_block_size(n, Q2_MAX_BLOCK)?;
    let table = RateTable::build(n, Strategy::HashingAndBisection)?;
    q2_lower_bound_with(&table, gamma)
}

/// [`q2_lower_bound`] reusing an already built table.
pub fn q2_lower_bound_with(table: &RateTable, gamma: f64) -> Result<ChannelPoint> {
    let channel = AmplitudeDampingChannel::new(gamma)?;
    let objective = |x: f64| {
        channel
            .output_state(x)
            .map(|s| table.expected_rate(&s))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (best_alpha2, rate) = maximize_unit_interval(objective);
    Ok(ChannelPoint {
        gamma: channel.gamma(),
        best_alpha2,
        rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::y_function;
    use crate::state::oracle::pair_density;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kraus_completeness() {
        for gamma in [0.0, 0.3, 0.6, 1.0] {
            let [e0, e1] = AmplitudeDampingChannel::new(gamma).unwrap().kraus();
            let sum = e0.transpose() * e0 + e1.transpose() * e1;
            assert!((sum - Matrix2::identity()).amax() <= 1e-15);
        }
    }

    #[test]
    fn output_state_examples() {
        let s = channel_output_state(0.0, 0.37).unwrap();
        assert_eq!((s.p(), s.alpha2()), (1.0, 0.37));
        let s = channel_output_state(1.0, 0.5).unwrap();
        assert!((s.p() - 0.5).abs() < 1e-15 && s.alpha2() == 1.0);
        let s = channel_output_state(0.6, 0.5).unwrap();
        assert!((s.p() - 0.82).abs() < 1e-15);
        assert!((s.alpha2() - 0.609756).abs() < 1e-6);
        let s = channel_output_state(1.0, 0.0).unwrap();
        assert_eq!((s.p(), s.alpha2()), (0.0, 1.0));
        assert!(channel_output_state(1.2, 0.5).is_err());
    }

    #[test]
    fn output_state_matches_dense_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let gamma: f64 = rng.random();
            let alpha2: f64 = rng.random();
            let input = pair_density(&SourceState::new(1.0, alpha2).unwrap());
            let out = AmplitudeDampingChannel::new(gamma)
                .unwrap()
                .apply_to_bob(&input);
            assert!((out.trace() - 1.0).abs() < 1e-12);
            let expected = pair_density(&channel_output_state(gamma, alpha2).unwrap());
            assert!(
                (out - expected).amax() < 1e-12,
                "gamma={gamma} alpha2={alpha2}"
            );
        }
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, v) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8 && v.abs() < 1e-15);
        let (x, _) = maximize_unit_interval(|x| -(x - 0.731).abs());
        assert!((x - 0.731).abs() < 1e-6);
        let (x, v) = maximize_unit_interval(|x| x);
        assert!(x > 1.0 - 1e-6 && v > 1.0 - 1e-6);
    }

    #[test]
    fn q2_endpoints() {
        let full = q2_lower_bound(1.0, 16).unwrap();
        assert_eq!(full.rate, 0.0);
        let noiseless = q2_lower_bound(0.0, 4).unwrap();
        assert!(noiseless.rate >= y_function(4).unwrap() - 1e-12);
        assert!(q2_lower_bound(0.5, 128).is_err());
    }

    #[test]
    fn q2_degrades_with_gamma() {
        let table = RateTable::build(32, Strategy::HashingAndBisection).unwrap();
        let low = q2_lower_bound_with(&table, 0.2).unwrap();
        let high = q2_lower_bound_with(&table, 0.3).unwrap();
        assert!(high.rate <= low.rate + 1e-9);
        assert!((0.0..=1.0).contains(&low.best_alpha2));
    }
}
