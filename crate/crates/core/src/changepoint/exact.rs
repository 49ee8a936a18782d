//! Exact posterior of the changepoint model for short sequences.
//!
//! For each `κ` the segment means integrate out separately:
//!
//! ```text
//! ∫ r e^{-r b} b^{-n} e^{-s/b} db
//! ```
//!
//! which is a modified Bessel function of the second kind. It is evaluated
//! by the trapezoid rule in `u = ln b`, where the integrand is smooth and
//! decays doubly exponentially in both directions.

use serde::{Deserialize, Serialize};

use super::ChangepointModel;
use crate::estimators::DecayEstimates;
use crate::{Error, Result};

pub const EXACT_MAX_K: usize = 12;

const U_LO: f64 = -32.0;
const U_HI: f64 = 16.0;
const STEPS: usize = 48_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactPosterior {
    /// `P(κ = j + 1 | data)` at index `j`.
    pub kappa_pmf: Vec<f64>,
    pub mean_b1: f64,
    pub mean_b2: f64,
}

/// Log of `∫ r e^{-r b} b^{power - n} e^{-s/b} db`.
fn log_segment_integral(rate: f64, n: f64, s: f64, power: f64) -> f64 {
    let h = (U_HI - U_LO) / STEPS as f64;
    // Exponent in u, including the db = e^u du Jacobian.
    let g = |u: f64| rate.ln() - rate * u.exp() + (power - n + 1.0) * u - s * (-u).exp();
    let mut max = f64::NEG_INFINITY;
    for i in 0..=STEPS {
        max = max.max(g(U_LO + i as f64 * h));
    }
    let mut sum = 0.0;
    for i in 0..=STEPS {
        let w = if i == 0 || i == STEPS { 0.5 } else { 1.0 };
        sum += w * (g(U_LO + i as f64 * h) - max).exp();
    }
    max + (sum * h).ln()
}

/// Posterior over `κ` and the posterior means of `b1`, `b2`. Allows `K <= 12`.
pub fn exact_small_posterior(estimates: &DecayEstimates, model: &ChangepointModel) -> Result<ExactPosterior> {
    estimates.check()?;
    let k = estimates.len();
    if !(2..=EXACT_MAX_K).contains(&k) {
        return Err(Error::InvalidConfig(format!(
            "exact posterior needs 2 <= K <= {EXACT_MAX_K}, got {k}"
        )));
    }
    let v = &estimates.values;
    let mut log_w = Vec::with_capacity(k);
    let mut cond_b1 = Vec::with_capacity(k);
    let mut cond_b2 = Vec::with_capacity(k);
    for kappa in 1..=k {
        let j = kappa - 1;
        let (n1, s1) = (j as f64, v[..j].iter().sum::<f64>());
        let (n2, s2) = ((k - j) as f64, v[j..].iter().sum::<f64>());
        let z1 = log_segment_integral(model.rate1, n1, s1, 0.0);
        let z2 = log_segment_integral(model.rate2, n2, s2, 0.0);
        log_w.push(z1 + z2);
        cond_b1.push((log_segment_integral(model.rate1, n1, s1, 1.0) - z1).exp());
        cond_b2.push((log_segment_integral(model.rate2, n2, s2, 1.0) - z2).exp());
    }
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut pmf: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let norm: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|p| *p /= norm);
    Ok(ExactPosterior {
        mean_b1: pmf.iter().zip(&cond_b1).map(|(p, m)| p * m).sum(),
        mean_b2: pmf.iter().zip(&cond_b2).map(|(p, m)| p * m).sum(),
        kappa_pmf: pmf,
    })
}
