//! Dense density-matrix oracle for blocks of at most four pairs.
//!
//! Basis convention: each pair is `(Alice qubit, Bob qubit)`, index `2A + B`;
//! pairs are tensored left to right, the first pair most significant.

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen, Vector4};

use super::{BlockOutcome, SourceState};
use crate::error::{domain, Result};

/// Largest block the dense oracle accepts (a `4^n x 4^n` matrix).
pub const ORACLE_MAX_BLOCK: usize = 4;

/// One row of the oracle table.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleOutcome {
    pub outcome: BlockOutcome,
    pub probability: f64,
    /// Rank of the post-measurement density matrix; zero for impossible
    /// outcomes.
    pub rank: usize,
    /// Schmidt rank across the Alice/Bob cut when the post-measurement state
    /// is pure.
    pub schmidt_rank: Option<usize>,
}

/// `|psi> = alpha |10> + beta |01>` in the pair basis.
pub fn entangled_vector(source: &SourceState) -> Vector4<f64> {
    Vector4::new(0.0, source.beta2().sqrt(), source.alpha2().sqrt(), 0.0)
}

/// The single-pair density matrix of `source`.
pub fn pair_density(source: &SourceState) -> Matrix4<f64> {
    let psi = entangled_vector(source);
    let mut rho = psi * psi.transpose() * source.p();
    rho[(0, 0)] += 1.0 - source.p();
    rho
}

/// Bob's reduced state (trace over Alice).
pub fn reduced_bob(rho: &Matrix4<f64>) -> Matrix2<f64> {
    Matrix2::from_fn(|i, j| rho[(i, j)] + rho[(2 + i, 2 + j)])
}

/// Alice's reduced state (trace over Bob).
pub fn reduced_alice(rho: &Matrix4<f64>) -> Matrix2<f64> {
    Matrix2::from_fn(|i, j| rho[(2 * i, 2 * j)] + rho[(2 * i + 1, 2 * j + 1)])
}

/// Von Neumann entropy in bits from a list of eigenvalues.
pub fn entropy_bits(eigenvalues: impl IntoIterator<Item = f64>) -> f64 {
    eigenvalues
        .into_iter()
        .map(crate::numerics::xlog2x_neg)
        .sum()
}

/// Alice's and Bob's bit strings of a basis index, as integers.
fn split_index(index: usize, n: usize) -> (usize, usize) {
    let (mut alice, mut bob) = (0, 0);
    for pair in (0..n).rev() {
        let digit = (index >> (2 * pair)) & 3;
        alice = (alice << 1) | (digit >> 1);
        bob = (bob << 1) | (digit & 1);
    }
    (alice, bob)
}

fn weights_of(index: usize, n: usize) -> (usize, usize) {
    let (alice, bob) = split_index(index, n);
    (alice.count_ones() as usize, bob.count_ones() as usize)
}

fn count_above(values: impl Iterator<Item = f64> + Clone, rel_tol: f64) -> usize {
    let top = values.clone().fold(0.0f64, f64::max);
    if top <= 0.0 {
        return 0;
    }
    values.filter(|&v| v > rel_tol * top).count()
}

/// Density-matrix rank of a projected block and, if it is rank one, the
/// Schmidt rank of its pure state.
fn ranks(block: DMatrix<f64>, support: &[usize], n: usize) -> (usize, Option<usize>) {
    let eig = SymmetricEigen::new(block);
    let rank = count_above(eig.eigenvalues.iter().cloned(), 1e-10);
    if rank != 1 {
        return (rank, None);
    }
    let top = eig.eigenvalues.imax();
    let side = 1 << n;
    let mut coefficients = DMatrix::zeros(side, side);
    for (row, &index) in support.iter().enumerate() {
        let (alice, bob) = split_index(index, n);
        coefficients[(alice, bob)] = eig.eigenvectors[(row, top)];
    }
    let singular = coefficients.singular_values();
    (1, Some(count_above(singular.iter().cloned(), 1e-8)))
}

/// Builds `rho^{(x) n}` densely, projects onto every `(a, b)` Hamming-weight
/// pair and returns the trace and the ranks of each post-measurement state.
pub fn brute_force_outcome_probs(source: &SourceState, n: usize) -> Result<Vec<OracleOutcome>> {
    if !matches!(n, 1 | 2 | 4) {
        return domain(format!("dense oracle supports n in {{1, 2, 4}}, got {n}"));
    }
    let pair = pair_density(source);
    let pair = DMatrix::from_fn(4, 4, |i, j| pair[(i, j)]);
    let mut rho = pair.clone();
    for _ in 1..n {
        rho = rho.kronecker(&pair);
    }
    let dim = rho.nrows();

    let mut subspaces: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n + 1]; n + 1];
    for index in 0..dim {
        let (a, b) = weights_of(index, n);
        subspaces[a][b].push(index);
    }

    let mut out = Vec::new();
    for (a, row) in subspaces.iter().enumerate() {
        for (b, support) in row.iter().enumerate() {
            let probability: f64 = support.iter().map(|&i| rho[(i, i)]).sum();
            if a + b > n {
                // Unreachable outcomes: the product component never has a 1.
                debug_assert!(probability.abs() < 1e-14);
                continue;
            }
            let block = DMatrix::from_fn(support.len(), support.len(), |i, j| {
                rho[(support[i], support[j])]
            });
            let (rank, schmidt_rank) = if probability > 0.0 {
                ranks(block, support, n)
            } else {
                (0, None)
            };
            out.push(OracleOutcome {
                outcome: BlockOutcome { n, a, b },
                probability,
                rank,
                schmidt_rank,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::exact::exact_binomial;
    use num_traits::ToPrimitive;

    #[test]
    fn single_pair_by_hand() {
        for p in [0.0, 0.3, 2.0 / 3.0, 1.0] {
            let s = SourceState::symmetric(p).unwrap();
            let table = brute_force_outcome_probs(&s, 1).unwrap();
            let get = |a, b| {
                table
                    .iter()
                    .find(|o| o.outcome.a == a && o.outcome.b == b)
                    .unwrap()
                    .probability
            };
            assert!((get(0, 0) - (1.0 - p)).abs() < 1e-15);
            assert!((get(1, 0) - p / 2.0).abs() < 1e-15);
            assert!((get(0, 1) - p / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_pairs_two_thirds() {
        let s = SourceState::symmetric(2.0 / 3.0).unwrap();
        let table = brute_force_outcome_probs(&s, 2).unwrap();
        let one_one = table
            .iter()
            .find(|o| o.outcome.a == 1 && o.outcome.b == 1)
            .unwrap();
        assert!((one_one.probability - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!((one_one.rank, one_one.schmidt_rank), (1, Some(2)));
        let total: f64 = table.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn terminal_ranks_are_binomials() {
        let s = SourceState::new(0.8, 0.4).unwrap();
        let table = brute_force_outcome_probs(&s, 4).unwrap();
        for o in &table {
            let k = o.outcome.k();
            // A uniform mixture of C(n, a+b) orthogonal pure states.
            assert_eq!(
                o.rank,
                exact_binomial(4, k).to_usize().unwrap(),
                "{:?}",
                o.outcome
            );
            if k == 4 {
                let expected = exact_binomial(4, o.outcome.a).to_usize().unwrap();
                assert_eq!(o.schmidt_rank, Some(expected), "{:?}", o.outcome);
            }
        }
    }

    #[test]
    fn rejects_large_blocks() {
        let s = SourceState::symmetric(0.5).unwrap();
        assert!(brute_force_outcome_probs(&s, 8).is_err());
        assert!(brute_force_outcome_probs(&s, 3).is_err());
    }

    #[test]
    fn raw_state_spectra() {
        let p = 0.9;
        let rho = pair_density(&SourceState::symmetric(p).unwrap());
        let mut global: Vec<f64> = SymmetricEigen::new(rho)
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        global.sort_by(|x, y| y.partial_cmp(x).unwrap());
        assert!((global[0] - p).abs() < 1e-14 && (global[1] - (1.0 - p)).abs() < 1e-14);
        let mut bob: Vec<f64> = SymmetricEigen::new(reduced_bob(&rho))
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        bob.sort_by(|x, y| y.partial_cmp(x).unwrap());
        assert!((bob[0] - (1.0 - p / 2.0)).abs() < 1e-14 && (bob[1] - p / 2.0).abs() < 1e-14);
        assert_eq!(reduced_alice(&rho), reduced_bob(&rho));
    }
}
