//! Cross-module properties of the rate engine, samplers and bounds.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use purify::channel::{q2_lower_bound_with, ree_upper_bound};
use purify::montecarlo::estimate_rate_with;
use purify::numerics::exact::parse_rational;
use purify::numerics::y_function;
use purify::rate::raw_hashing_rate;
use purify::recurrence::improved_recurrence_rate;
use purify::report::open_grid;
use purify::state::{
    brute_force_outcome_probs, outcome_distribution, outcome_probability, split_distribution,
};
use purify::{RateTable, SourceState, Strategy};

#[test]
fn outcome_distributions_normalised() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let source = SourceState::new(rng.random(), rng.random()).unwrap();
        let mut n = 2;
        while n <= 128 {
            let total: f64 = outcome_distribution(&source, n)
                .unwrap()
                .iter()
                .map(|(_, p)| p)
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "n={n} {source:?}");
            n *= 2;
        }
    }
}

#[test]
fn dense_oracle_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let source = SourceState::new(rng.random(), rng.random()).unwrap();
        for n in [1, 2, 4] {
            for row in brute_force_outcome_probs(&source, n).unwrap() {
                let o = row.outcome;
                let formula = outcome_probability(&source, n, o.a, o.b).unwrap();
                assert!((formula - row.probability).abs() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_identity(p in 0.0f64..=1.0, alpha2 in 0.0f64..=1.0, m in 1u32..=6, a_frac in 0.0f64..=1.0, b_frac in 0.0f64..=1.0) {
        let source = SourceState::new(p, alpha2).unwrap();
        let n = 1usize << m;
        let a = (a_frac * n as f64) as usize;
        let b = (b_frac * (n - a) as f64) as usize;
        let parent = outcome_probability(&source, n, a, b).unwrap();
        let split = split_distribution(n, a, b).unwrap();
        let total: f64 = split.iter().map(|(_, q)| q).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let half = n / 2;
        for (s, q) in split {
            let children = outcome_probability(&source, half, s.left_a, s.left_b).unwrap()
                * outcome_probability(&source, half, s.right_a, s.right_b).unwrap();
            prop_assert!((parent * q - children).abs() < 1e-10);
        }
    }

    #[test]
    fn rates_ordered(p in 0.0f64..=1.0, alpha2 in 0.0f64..=1.0) {
        let source = SourceState::new(p, alpha2).unwrap();
        let full = RateTable::build(32, Strategy::HashingAndBisection).unwrap();
        let bisect = RateTable::build(32, Strategy::BisectionOnly).unwrap();
        let r = full.expected_rate(&source);
        prop_assert!(r >= bisect.expected_rate(&source) - 1e-12);
        prop_assert!((0.0..=1.0).contains(&r));
    }
}

#[test]
fn monte_carlo_unbiased() {
    for n in [2, 4, 8, 16] {
        let table = RateTable::build(n, Strategy::HashingAndBisection).unwrap();
        for p in [1.0 / 3.0, 2.0 / 3.0, 0.9] {
            let source = SourceState::symmetric(p).unwrap();
            let exact = table.expected_rate(&source);
            let est = estimate_rate_with(&table, &source, n, 100_000, 42 + n as u64).unwrap();
            assert!(
                (est.mean - exact).abs() <= 4.0 * est.stderr,
                "n={n} p={p}: {est:?} vs {exact}"
            );
        }
    }
}

#[test]
fn bounds_sandwich_the_protocol() {
    let table = RateTable::build(64, Strategy::HashingAndBisection).unwrap();
    for p in open_grid(19) {
        let ours = table.expected_rate(&SourceState::symmetric(p).unwrap());
        let ree = ree_upper_bound(p).unwrap();
        assert!(ours <= ree + 1e-9, "p={p}");
        assert!(raw_hashing_rate(p).unwrap() <= ree + 1e-9, "p={p}");
        assert!(
            ours >= improved_recurrence_rate(p, 1e-12).unwrap() - 1e-9,
            "p={p}"
        );
    }
}

#[test]
fn noiseless_channel_reaches_pure_state_yield() {
    let mut n = 2;
    while n <= 32 {
        let table = RateTable::build(n, Strategy::HashingAndBisection).unwrap();
        let point = q2_lower_bound_with(&table, 0.0).unwrap();
        assert!(point.rate >= y_function(n).unwrap() - 1e-12, "n={n}");
        n *= 2;
    }
}

#[test]
fn exact_fraction_and_decimal_agree() {
    let fraction = parse_rational("2/3").unwrap();
    let decimal = parse_rational("0.66666666666666667").unwrap();
    use num_traits::ToPrimitive;
    let table = RateTable::build(64, Strategy::HashingAndBisection).unwrap();
    let a = table.expected_rate(&SourceState::symmetric(fraction.to_f64().unwrap()).unwrap());
    let b = table.expected_rate(&SourceState::symmetric(decimal.to_f64().unwrap()).unwrap());
    assert!((a - b).abs() < 1e-12);
}
