//! Empirical and Bayesian bootstrap.
//!
//! Resample `r` draws from its own generator seeded with `seed + r`, so the
//! result does not depend on how the resamples are scheduled.

use rand::Rng as _;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::stats::{mean, quantile_sorted, sorted};
use crate::{rng_from_seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    /// The statistic on the original sample (empirical) or the mean of the
    /// draws (Bayesian).
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("level must lie in (0, 1), got {level}")))
    }
}

/// Pivotal bootstrap interval `[2θ̂ - q_{1-a/2}, 2θ̂ - q_{a/2}]`, where `q` are
/// quantiles of the statistic over resamples drawn with replacement.
pub fn empirical_bootstrap<F>(samples: &[f64], statistic: F, level: f64, resamples: usize, seed: u64) -> Result<Interval>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_level(level)?;
    if resamples < 2 {
        return Err(Error::TooFewResamples(resamples));
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let theta = statistic(samples);
    let n = samples.len();
    let stats: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, r| {
                let mut rng = rng_from_seed(seed.wrapping_add(r as u64));
                for x in buf.iter_mut() {
                    *x = samples[rng.random_range(0..n)];
                }
                statistic(buf)
            },
        )
        .collect();
    let s = sorted(&stats);
    let a = 1.0 - level;
    Ok(Interval {
        estimate: theta,
        low: 2.0 * theta - quantile_sorted(&s, 1.0 - a / 2.0),
        high: 2.0 * theta - quantile_sorted(&s, a / 2.0),
    })
}

/// Bayesian bootstrap: each draw weights the samples with a flat Dirichlet
/// vector and evaluates `statistic(samples, weights)`. Returns the mean of
/// the draws and their percentile interval.
pub fn bayesian_bootstrap<F>(samples: &[f64], statistic: F, level: f64, draws: usize, seed: u64) -> Result<Interval>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    check_level(level)?;
    if draws == 0 {
        return Err(Error::InvalidConfig("draws must be at least 1".into()));
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = samples.len();
    let stats: Vec<f64> = (0..draws)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |w, r| {
                let mut rng = rng_from_seed(seed.wrapping_add(r as u64));
                for x in w.iter_mut() {
                    *x = Exp1.sample(&mut rng);
                }
                let total: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= total);
                statistic(samples, w)
            },
        )
        .collect();
    let s = sorted(&stats);
    let a = 1.0 - level;
    let m = mean(&stats);
    Ok(Interval {
        estimate: m,
        low: quantile_sorted(&s, a / 2.0).min(m),
        high: quantile_sorted(&s, 1.0 - a / 2.0).max(m),
    })
}

pub fn weighted_mean(samples: &[f64], weights: &[f64]) -> f64 {
    samples.iter().zip(weights).map(|(x, w)| x * w).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::StandardNormal;

    #[test]
    fn constant_samples_give_degenerate_intervals() {
        let xs = [2.5; 30];
        let e = empirical_bootstrap(&xs, mean, 0.95, 200, 1).unwrap();
        assert_eq!((e.low, e.estimate, e.high), (2.5, 2.5, 2.5));
        let b = bayesian_bootstrap(&xs, weighted_mean, 0.95, 200, 1).unwrap();
        assert!((b.low - 2.5).abs() < 1e-12 && (b.high - 2.5).abs() < 1e-12);
    }

    #[test]
    fn argument_errors() {
        assert!(matches!(
            empirical_bootstrap(&[1.0, 2.0], mean, 0.95, 1, 0),
            Err(Error::TooFewResamples(1))
        ));
        assert!(bayesian_bootstrap(&[1.0], weighted_mean, 0.95, 0, 0).is_err());
        assert!(empirical_bootstrap(&[1.0, 2.0], mean, 1.0, 10, 0).is_err());
    }

    #[test]
    fn bayesian_draws_average_to_sample_mean() {
        // E[Σ w_i x_i] = x̄ under flat Dirichlet weights.
        let xs: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin() + 2.0).collect();
        let b = bayesian_bootstrap(&xs, weighted_mean, 0.95, 20_000, 3).unwrap();
        let sd_of_draws = crate::stats::std_dev(&xs) / (xs.len() as f64 + 1.0).sqrt();
        let se = sd_of_draws / (20_000f64).sqrt();
        assert!((b.estimate - mean(&xs)).abs() < 4.0 * se, "{} vs {}", b.estimate, mean(&xs));
    }

    #[test]
    fn empirical_coverage_of_normal_mean() {
        let trials = 500;
        let mut covered = 0;
        for t in 0..trials {
            let mut rng = rng_from_seed(10_000 + t);
            let xs: Vec<f64> = (0..200).map(|_| StandardNormal.sample(&mut rng)).collect();
            let ci = empirical_bootstrap(&xs, mean, 0.95, 2000, t * 7919).unwrap();
            if ci.low <= 0.0 && 0.0 <= ci.high {
                covered += 1;
            }
        }
        let p = covered as f64 / trials as f64;
        let sigma = (0.95 * 0.05 / trials as f64).sqrt();
        assert!((p - 0.95).abs() <= 3.0 * sigma, "coverage {p}");
    }
}
