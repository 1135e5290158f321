//! Relative entropy of entanglement of the Bell-state mixture.
//!
//! [`ree_upper_bound`] is the closed form
//! `E_R(p) = (p - 2) log2(1 - p/2) + (1 - p) log2(1 - p)`; [`ree_oracle`]
//! computes the same quantity by minimising `S(rho || sigma)` over mixtures
//! of product pure states, which for two qubits cover the separable set.

use std::f64::consts::{LN_2, PI};

use nalgebra::{Complex, Matrix4, SymmetricEigen, Vector2, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::state::oracle::pair_density;
use crate::state::SourceState;

type C64 = Complex<f64>;
type CMatrix4 = Matrix4<C64>;

/// Closed-form REE of `p |psi+><psi+| + (1-p) |00><00|`, in ebits.
pub fn ree_upper_bound(p: f64) -> Result<f64> {
    let p = SourceState::symmetric(p)?.p();
    let tail = if p < 1.0 {
        (1.0 - p) * (1.0 - p).log2()
    } else {
        0.0
    };
    Ok(((p - 2.0) * (1.0 - p / 2.0).log2() + tail).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReeOracleConfig {
    /// Product pure states in the separable mixture.
    pub components: usize,
    /// Independent random starts.
    pub starts: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for ReeOracleConfig {
    fn default() -> Self {
        ReeOracleConfig {
            components: 16,
            starts: 8,
            max_iterations: 4000,
            seed: 0x5eed_0e0e,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReeEstimate {
    /// Smallest relative entropy found over converged starts, in ebits.
    pub value: f64,
    pub converged_starts: usize,
    /// Largest minus smallest value over converged starts.
    pub spread: f64,
}

/// [`ree_oracle_with`] under the default configuration.
pub fn ree_oracle(p: f64) -> Result<ReeEstimate> {
    ree_oracle_with(p, &ReeOracleConfig::default())
}

/// Numerically minimises `S(rho || sigma)` over separable `sigma`.
///
/// Errors with [`Error::Numeric`] when no start converges.
pub fn ree_oracle_with(p: f64, config: &ReeOracleConfig) -> Result<ReeEstimate> {
    let source = SourceState::symmetric(p)?;
    if config.components == 0 || config.starts == 0 {
        return domain("REE oracle needs at least one component and one start");
    }
    let rho = pair_density(&source).map(|v| C64::new(v, 0.0));
    let problem = Problem::new(rho, config.components);

    let runs: Vec<Option<f64>> = (0..config.starts)
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(start as u64);
            let x0 = problem.random_start(&mut rng);
            minimize(&problem, x0, config.max_iterations).map(|nats| nats / LN_2)
        })
        .collect();
    let converged: Vec<f64> = runs.into_iter().flatten().collect();
    if converged.is_empty() {
        return Err(Error::Numeric(format!(
            "REE oracle at p = {p}: none of {} starts converged",
            config.starts
        )));
    }
    let best = converged.iter().cloned().fold(f64::INFINITY, f64::min);
    let worst = converged.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ReeEstimate {
        value: best.max(0.0),
        converged_starts: converged.len(),
        spread: worst - best,
    })
}

/// Parameters per component: Bloch angles for Alice and Bob, then a weight logit.
const PARAMS: usize = 5;

struct Problem {
    rho: CMatrix4,
    /// `Tr rho ln rho`, in nats.
    neg_entropy: f64,
    components: usize,
}

struct Component {
    weight: f64,
    state: Vector4<C64>,
    d_theta_a: Vector4<C64>,
    d_phi_a: Vector4<C64>,
    d_theta_b: Vector4<C64>,
    d_phi_b: Vector4<C64>,
}

fn qubit(theta: f64, phi: f64) -> (Vector2<C64>, Vector2<C64>, Vector2<C64>) {
    let (s, c) = (theta / 2.0).sin_cos();
    let phase = C64::from_polar(1.0, phi);
    let v = Vector2::new(C64::new(c, 0.0), phase * s);
    let d_theta = Vector2::new(C64::new(-s / 2.0, 0.0), phase * (c / 2.0));
    let d_phi = Vector2::new(C64::new(0.0, 0.0), phase * C64::new(0.0, s));
    (v, d_theta, d_phi)
}

fn kron(a: &Vector2<C64>, b: &Vector2<C64>) -> Vector4<C64> {
    Vector4::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
}

impl Problem {
    fn new(rho: CMatrix4, components: usize) -> Self {
        let eig = SymmetricEigen::new(rho);
        let neg_entropy = eig
            .eigenvalues
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| v * v.ln())
            .sum();
        Problem {
            rho,
            neg_entropy,
            components,
        }
    }

    fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.components * PARAMS);
        for _ in 0..self.components {
            for _ in 0..2 {
                let u: f64 = rng.random();
                x.push((1.0 - 2.0 * u).acos());
                x.push(rng.random::<f64>() * 2.0 * PI);
            }
            x.push(0.0);
        }
        x
    }

    fn unpack(&self, x: &[f64]) -> Vec<Component> {
        let logits: Vec<f64> = x.chunks(PARAMS).map(|c| c[4]).collect();
        let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|z| (z - top).exp()).collect();
        let total: f64 = exps.iter().sum();
        x.chunks(PARAMS)
            .zip(exps)
            .map(|(c, e)| {
                let (a, da_t, da_p) = qubit(c[0], c[1]);
                let (b, db_t, db_p) = qubit(c[2], c[3]);
                Component {
                    weight: e / total,
                    state: kron(&a, &b),
                    d_theta_a: kron(&da_t, &b),
                    d_phi_a: kron(&da_p, &b),
                    d_theta_b: kron(&a, &db_t),
                    d_phi_b: kron(&a, &db_p),
                }
            })
            .collect()
    }

    /// Relative entropy in nats and its gradient.
    fn evaluate(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let comps = self.unpack(x);
        let mut sigma = CMatrix4::zeros();
        for c in &comps {
            sigma += c.state * c.state.adjoint() * C64::new(c.weight, 0.0);
        }
        let eig = SymmetricEigen::new(sigma);
        let v = eig.eigenvectors;
        let lambda: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(1e-300)).collect();
        let rho_t = v.adjoint() * self.rho * v;

        let mut cross = 0.0;
        for i in 0..4 {
            cross += rho_t[(i, i)].re * lambda[i].ln();
        }
        let value = self.neg_entropy - cross;
        if !value.is_finite() {
            return (f64::INFINITY, vec![0.0; x.len()]);
        }

        // Gradient with respect to sigma: -V (rho_t o L) V^dag with L the
        // divided differences of ln.
        let mut g_t = CMatrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let (li, lj) = (lambda[i], lambda[j]);
                let l = if (li - lj).abs() <= 1e-12 * li.max(lj) {
                    2.0 / (li + lj)
                } else {
                    (li.ln() - lj.ln()) / (li - lj)
                };
                g_t[(i, j)] = -rho_t[(i, j)] * l;
            }
        }
        let g = v * g_t * v.adjoint();

        let quad = |u: &Vector4<C64>, w: &Vector4<C64>| (u.adjoint() * g * w)[(0, 0)];
        let expect: Vec<f64> = comps.iter().map(|c| quad(&c.state, &c.state).re).collect();
        let mean: f64 = comps.iter().zip(&expect).map(|(c, e)| c.weight * e).sum();
        let mut grad = Vec::with_capacity(x.len());
        for (c, e) in comps.iter().zip(&expect) {
            let d = |dv: &Vector4<C64>| 2.0 * c.weight * quad(&c.state, dv).re;
            grad.push(d(&c.d_theta_a));
            grad.push(d(&c.d_phi_a));
            grad.push(d(&c.d_theta_b));
            grad.push(d(&c.d_phi_b));
            grad.push(c.weight * (e - mean));
        }
        (value, grad)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// L-BFGS with Armijo backtracking. Returns the final value when the
/// iteration stalls at a stationary point, `None` when it runs out of
/// iterations or the line search breaks down.
fn minimize(problem: &Problem, mut x: Vec<f64>, max_iterations: usize) -> Option<f64> {
    const MEMORY: usize = 12;
    const ARMIJO: f64 = 1e-4;
    const STALL_ROUNDS: usize = 10;

    let (mut f, mut g) = problem.evaluate(&x);
    if !f.is_finite() {
        return None;
    }
    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut stalled = 0;
    for _ in 0..max_iterations {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm < 1e-10 {
            return Some(f);
        }

        // Two-loop recursion for the quasi-Newton direction.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.last() {
            let scale = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= scale);
        } else {
            q.iter_mut().for_each(|qi| *qi /= gnorm.max(1.0));
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            history.clear();
            dir = g.iter().map(|v| -v / gnorm.max(1.0)).collect();
            slope = dot(&g, &dir);
        }

        let mut step = 1.0;
        let (x_new, f_new, g_new) = loop {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = problem.evaluate(&trial);
            if ft.is_finite() && ft <= f + ARMIJO * step * slope {
                break (trial, ft, gt);
            }
            step *= 0.5;
            if step < 1e-16 {
                // No descent along a quasi-Newton or gradient direction:
                // accept as stationary if the gradient is already small.
                return if gnorm < 1e-6 { Some(f) } else { None };
            }
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 {
            if history.len() == MEMORY {
                history.remove(0);
            }
            history.push((s, y, 1.0 / sy));
        }

        if (f - f_new).abs() <= 1e-14 * f.abs().max(1e-3) {
            stalled += 1;
            if stalled >= STALL_ROUNDS {
                return Some(f_new);
            }
        } else {
            stalled = 0;
        }
        x = x_new;
        f = f_new;
        g = g_new;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(ree_upper_bound(0.0).unwrap(), 0.0);
        assert!((ree_upper_bound(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((ree_upper_bound(2.0 / 3.0).unwrap() - 0.251629).abs() < 1e-6);
        assert!(ree_upper_bound(1.5).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let rho = pair_density(&SourceState::symmetric(0.6).unwrap()).map(|v| C64::new(v, 0.0));
        let problem = Problem::new(rho, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = problem.random_start(&mut rng);
        let (_, grad) = problem.evaluate(&x);
        let h = 1e-6;
        for i in 0..x.len() {
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (problem.evaluate(&up).0 - problem.evaluate(&down).0) / (2.0 * h);
            assert!(
                (fd - grad[i]).abs() < 1e-6 * (1.0 + fd.abs()),
                "param {i}: {fd} vs {}",
                grad[i]
            );
        }
    }

    #[test]
    fn oracle_endpoints() {
        assert!(ree_oracle(0.0).unwrap().value.abs() < 1e-6);
        assert!((ree_oracle(1.0).unwrap().value - 1.0).abs() < 1e-3);
    }

    #[test]
    fn oracle_agrees_with_closed_form() {
        let p = 2.0 / 3.0;
        let est = ree_oracle(p).unwrap();
        assert!(
            (est.value - ree_upper_bound(p).unwrap()).abs() < 1e-4,
            "{est:?}"
        );
    }

    #[test]
    fn oracle_is_deterministic() {
        assert_eq!(ree_oracle(0.4).unwrap(), ree_oracle(0.4).unwrap());
    }
}
