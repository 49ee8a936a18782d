//! Branching-structure expectation maximization with a shared decay.
//!
//! Each event is attributed either to the background or to an earlier
//! event. With offspring kernels integrated over the whole half-line the
//! M-step has closed forms, and the objective that EM increases is
//!
//! ```text
//! L∞ = -Σ_p μ_p H - Σ_pq α_pq n_q / β + Σ_i ln λ(t_i)
//! ```
//!
//! The pairwise responsibility sums are accumulated in O(n·M) with the
//! recursions `S(t) = Σ e^{-β(t-t_j)}` and `D(t) = Σ (t-t_j) e^{-β(t-t_j)}`.

use super::pooled::Pooled;
use super::{on_bound, DecayFit, FitConfig, FitMethod};
use crate::model::Matrix;
use crate::{Error, EventStream, Result};

const MONOTONE_SLACK: f64 = 1e-10;

pub fn fit_decay_em(streams: &[EventStream], config: &FitConfig) -> Result<DecayFit> {
    config.validate()?;
    let pooled = Pooled::new(streams)?;
    pooled.require_pairs()?;
    let m = pooled.dims;
    let h = pooled.total_horizon;
    let mut beta = config.start();
    let mut mu: Vec<f64> = pooled.counts.iter().map(|&n| 0.5 * n as f64 / h).collect();
    let mut alpha = vec![0.5 * beta / m as f64; m * m];

    let mut previous = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for iter in 0..config.em.max_iters {
        iterations = iter + 1;
        let step = e_step(&pooled, &mu, &alpha, beta);
        if previous.is_finite() && step.objective < previous - MONOTONE_SLACK * previous.abs().max(1.0) {
            return Err(Error::LikelihoodDecrease {
                iter,
                before: previous,
                after: step.objective,
            });
        }
        if previous.is_finite() && (step.objective - previous).abs() <= config.em.tol * previous.abs().max(1.0) {
            converged = true;
            break;
        }
        previous = step.objective;

        for p in 0..m {
            mu[p] = step.background[p] / h;
        }
        let triggered: f64 = step.pairs.iter().sum();
        beta = if step.lag > 0.0 && triggered > 0.0 {
            (triggered / step.lag).clamp(config.bounds[0], config.bounds[1])
        } else {
            config.bounds[1]
        };
        for p in 0..m {
            for q in 0..m {
                let n_q = pooled.counts[q] as f64;
                alpha[p * m + q] = if n_q > 0.0 { beta * step.pairs[p * m + q] / n_q } else { 0.0 };
            }
        }
    }

    Ok(DecayFit {
        method: FitMethod::Em,
        beta,
        loglik: pooled.loglik(&mu, &alpha, beta, None),
        mu,
        alpha: Matrix::from_flat(m, alpha),
        converged,
        at_bound: on_bound(beta, config.bounds),
        evaluations: iterations,
    })
}

struct Expectation {
    objective: f64,
    /// Expected background events per dimension.
    background: Vec<f64>,
    /// Expected number of (child in p, parent in q) pairs, row-major.
    pairs: Vec<f64>,
    /// Expected total parent-child lag.
    lag: f64,
}

fn e_step(pooled: &Pooled, mu: &[f64], alpha: &[f64], beta: f64) -> Expectation {
    let m = pooled.dims;
    let mut background = vec![0.0; m];
    let mut pairs = vec![0.0; m * m];
    let mut lag = 0.0;
    let mut log_sum = 0.0;
    let mut s = vec![0.0; m];
    let mut d = vec![0.0; m];
    for seg in &pooled.segments {
        s.iter_mut().for_each(|v| *v = 0.0);
        d.iter_mut().for_each(|v| *v = 0.0);
        let mut prev = f64::NAN;
        for i in seg.start..seg.end {
            let (t, p) = (pooled.times[i], pooled.labels[i]);
            if i > seg.start {
                let dt = t - prev;
                let f = (-beta * dt).exp();
                for q in 0..m {
                    d[q] = f * (d[q] + dt * s[q]);
                    s[q] *= f;
                }
            }
            let row = &alpha[p * m..(p + 1) * m];
            let lambda = mu[p] + row.iter().zip(&s).map(|(a, x)| a * x).sum::<f64>();
            log_sum += lambda.ln();
            let inv = 1.0 / lambda;
            background[p] += mu[p] * inv;
            for q in 0..m {
                pairs[p * m + q] += row[q] * s[q] * inv;
                lag += row[q] * d[q] * inv;
            }
            s[p] += 1.0;
            prev = t;
        }
    }
    let mut objective = log_sum;
    for p in 0..m {
        objective -= mu[p] * pooled.total_horizon;
        for q in 0..m {
            objective -= alpha[p * m + q] * pooled.counts[q] as f64 / beta;
        }
    }
    Expectation {
        objective,
        background,
        pairs,
        lag,
    }
}
