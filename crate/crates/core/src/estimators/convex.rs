//! Baseline and excitation for a fixed decay.
//!
//! With the decay fixed the log-likelihood is concave in `(μ, α)` and
//! separates over target dimensions, so each row `(μ_p, α_p·)` is a small
//! nonnegativity-constrained concave problem. Each is solved by projected
//! gradient ascent whose direction is scaled by the inverse Hessian on the
//! free coordinates, with Armijo backtracking along the projection arc.

use serde::{Deserialize, Serialize};

use super::pooled::{Design, Pooled};
use crate::model::{EventStream, Matrix};
use crate::{Error, Result};

pub const MAX_ITERS: usize = 5000;
pub const REL_TOL: f64 = 1e-9;

/// Result of the inner concave fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuAlphaFit {
    pub mu: Vec<f64>,
    pub alpha: Matrix,
    pub loglik: f64,
    /// False when the iteration cap was hit; the best iterate is still returned.
    pub converged: bool,
}

/// Maximizes the pooled log-likelihood over `μ >= 0, α >= 0` at a fixed shared decay.
pub fn fit_mu_alpha(streams: &[EventStream], beta: f64) -> Result<MuAlphaFit> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::NegativeRate(format!("beta = {beta}")));
    }
    let pooled = Pooled::new(streams)?;
    Ok(fit_pooled(&pooled, beta))
}

pub(crate) fn fit_pooled(pooled: &Pooled, beta: f64) -> MuAlphaFit {
    let design = pooled.design(beta);
    let m = pooled.dims;
    let mut mu = vec![0.0; m];
    let mut alpha = Matrix::zeros(m);
    let mut loglik = 0.0;
    let mut converged = true;
    for p in 0..m {
        let start = pooled.counts[p] as f64 / pooled.total_horizon;
        let (theta, value, ok) = maximize_row(&design, p, start);
        mu[p] = theta[0];
        for q in 0..m {
            alpha.set(p, q, theta[q + 1]);
        }
        loglik += value;
        converged &= ok;
    }
    MuAlphaFit {
        mu,
        alpha,
        loglik,
        converged,
    }
}

fn maximize_row(design: &Design, p: usize, empirical_rate: f64) -> (Vec<f64>, f64, bool) {
    let w = design.width();
    if design.rows[p].is_empty() {
        // No events in this dimension: the objective is -c·θ, maximal at 0.
        return (vec![0.0; w], 0.0, true);
    }
    let mut theta = vec![0.0; w];
    theta[0] = 0.5 * empirical_rate;
    let mut grad = vec![0.0; w];
    let mut neg_hess = vec![0.0; w * w];
    let mut value = design.value_grad_neg_hess(p, &theta, &mut grad, &mut neg_hess);

    for _ in 0..MAX_ITERS {
        let free: Vec<bool> = (0..w).map(|k| theta[k] > 0.0 || grad[k] > 0.0).collect();
        let proj_grad = (0..w).filter(|&k| free[k]).map(|k| grad[k].abs()).fold(0.0, f64::max);
        if proj_grad == 0.0 {
            return (theta, value, true);
        }
        let newton = newton_direction(&neg_hess, &grad, &free, w);
        let mut stepped = None;
        for dir in [newton, Some(masked(&grad, &free))].into_iter().flatten() {
            if let Some(next) = backtrack(design, p, &theta, value, &grad, &dir) {
                stepped = Some(next);
                break;
            }
        }
        let Some((next, next_value)) = stepped else {
            // No ascent possible at floating-point resolution.
            return (theta, value, true);
        };
        let change = next_value - value;
        theta = next;
        value = design.value_grad_neg_hess(p, &theta, &mut grad, &mut neg_hess);
        if change <= REL_TOL * value.abs().max(1.0) {
            return (theta, value, true);
        }
    }
    (theta, value, false)
}

fn masked(v: &[f64], free: &[bool]) -> Vec<f64> {
    v.iter().zip(free).map(|(&x, &f)| if f { x } else { 0.0 }).collect()
}

fn newton_direction(neg_hess: &[f64], grad: &[f64], free: &[bool], w: usize) -> Option<Vec<f64>> {
    let idx: Vec<usize> = (0..w).filter(|&k| free[k]).collect();
    let n = idx.len();
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    let scale = idx.iter().map(|&k| neg_hess[k * w + k]).fold(0.0, f64::max).max(1e-300);
    for (i, &ki) in idx.iter().enumerate() {
        b[i] = grad[ki];
        for (j, &kj) in idx.iter().enumerate() {
            a[i * n + j] = neg_hess[ki * w + kj];
        }
        a[i * n + i] += 1e-12 * scale;
    }
    if !solve_spd(&mut a, &mut b, n) {
        return None;
    }
    let mut dir = vec![0.0; w];
    for (i, &k) in idx.iter().enumerate() {
        dir[k] = b[i];
    }
    let slope: f64 = dir.iter().zip(grad).map(|(d, g)| d * g).sum();
    (slope > 0.0 && dir.iter().all(|d| d.is_finite())).then_some(dir)
}

fn backtrack(design: &Design, p: usize, theta: &[f64], value: f64, grad: &[f64], dir: &[f64]) -> Option<(Vec<f64>, f64)> {
    let mut t = 1.0;
    for _ in 0..80 {
        let next: Vec<f64> = theta.iter().zip(dir).map(|(x, d)| (x + t * d).max(0.0)).collect();
        let ascent: f64 = next
            .iter()
            .zip(theta)
            .zip(grad)
            .map(|((n, x), g)| (n - x) * g)
            .sum();
        if ascent > 0.0 {
            let v = design.value(p, &next);
            if v.is_finite() && v >= value + 1e-4 * ascent {
                return Some((next, v));
            }
        }
        t *= 0.5;
    }
    None
}

/// Cholesky solve of `a x = b` in place; false if `a` is not positive definite.
pub(crate) fn solve_spd(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::{loglik_set, LoglikOptions};
    use crate::model::HawkesParams;
    use crate::sim::{simulate_batch, Stop};

    #[test]
    fn recovers_truth_at_true_decay() {
        let p = HawkesParams::univariate(0.1, 0.5, 1.2).unwrap();
        let set = simulate_batch(&p, Stop::Horizon(1000.0), 100, 77).unwrap();
        let fit = fit_mu_alpha(&set, 1.2).unwrap();
        assert!(fit.converged);
        assert!((fit.mu[0] - 0.1).abs() / 0.1 < 0.15, "{:?}", fit.mu);
        assert!((fit.alpha.get(0, 0) - 0.5).abs() / 0.5 < 0.15, "{:?}", fit.alpha);
    }

    #[test]
    fn reported_loglik_matches_direct_evaluation() {
        let p = HawkesParams::new(
            vec![0.1, 0.5],
            vec![vec![0.1, 0.6], vec![0.7, 0.2]],
            crate::Decay::Shared(1.2),
        )
        .unwrap();
        let set = simulate_batch(&p, Stop::Horizon(200.0), 4, 3).unwrap();
        let fit = fit_mu_alpha(&set, 1.5).unwrap();
        let fitted = HawkesParams::shared(fit.mu.clone(), fit.alpha.clone(), 1.5).unwrap();
        let direct = loglik_set(&fitted, &set, LoglikOptions::default()).unwrap();
        assert!((fit.loglik - direct).abs() < 1e-8 * direct.abs());
        // Optimality: nudging any coordinate up cannot improve the objective.
        for k in 0..6 {
            let mut mu = fit.mu.clone();
            let mut alpha = fit.alpha.clone();
            if k < 2 {
                mu[k] *= 1.01;
            } else {
                let (r, c) = ((k - 2) / 2, (k - 2) % 2);
                alpha.set(r, c, alpha.get(r, c) + 0.01);
            }
            let nudged = HawkesParams::shared(mu, alpha, 1.5).unwrap();
            assert!(loglik_set(&nudged, &set, LoglikOptions::default()).unwrap() <= fit.loglik + 1e-6);
        }
    }

    #[test]
    fn empty_set_is_an_error() {
        assert!(matches!(fit_mu_alpha(&[], 1.0), Err(Error::EmptySet)));
    }

    #[test]
    fn cholesky_solves_small_system() {
        let mut a = vec![4.0, 2.0, 2.0, 3.0];
        let mut b = vec![2.0, 1.0];
        assert!(solve_spd(&mut a, &mut b, 2));
        assert!((b[0] - 0.5).abs() < 1e-15 && b[1].abs() < 1e-15);
        let mut singular = vec![1.0, 1.0, 1.0, 1.0];
        assert!(!solve_spd(&mut singular, &mut [1.0, 1.0], 2));
    }
}
