//! Error and goodness-of-fit metrics shared by the experiments.

use crate::stats::{ks_one_sample, ks_two_sample};
use crate::{Error, Result};

/// `√(mean((x_i - truth)²))`.
pub fn metric_rmse(estimates: &[f64], truth: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sq: f64 = estimates.iter().map(|x| (x - truth) * (x - truth)).sum();
    Ok((sq / estimates.len() as f64).sqrt())
}

/// Two-sample K-S statistic, typically on inter-event times.
pub fn metric_ks(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(ks_two_sample(sample_a, sample_b))
}

/// One-sample K-S statistic of rescaled gaps against Exp(1).
pub fn metric_ks_exp1(gaps: &[f64]) -> Result<f64> {
    if gaps.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(ks_one_sample(gaps, |x| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() }))
}
