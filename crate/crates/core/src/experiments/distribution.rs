//! Standardized distribution of per-realization decay fits, with and without
//! a break in the decay halfway through.

use serde::{Deserialize, Serialize};

use super::{row, sub_seed, Outcome, Scale, Table};
use crate::estimators::{sequential_estimates, FitConfig, FitMethod, SequentialMode};
use crate::sim::{simulate_batch, Stop};
use crate::stats::{ks_one_sample, mean, standard_normal_cdf, std_dev};
use crate::{Error, HawkesParams, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionConfig {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub horizon: f64,
    pub realizations: usize,
    /// Added to the decay for the second half of the break case.
    pub increment: f64,
    pub fit: FitConfig,
    pub seed: u64,
}

impl DistributionConfig {
    pub fn for_scale(_scale: Scale, seed: u64) -> Self {
        Self {
            mu: 0.1,
            alpha: 0.5,
            beta: 1.2,
            horizon: 1000.0,
            realizations: 100,
            increment: 1.0,
            fit: FitConfig::new(FitMethod::Nonlinear).with_seed(seed),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionOutcome {
    pub beta_hat_single: Vec<f64>,
    pub beta_hat_break: Vec<f64>,
    /// K-S distance of the standardized fits to N(0, 1).
    pub ks_single: f64,
    pub ks_break: f64,
    pub seeds: Vec<u64>,
}

fn standardize(xs: &[f64]) -> Result<Vec<f64>> {
    let (m, s) = (mean(xs), std_dev(xs));
    if !(s > 0.0) {
        return Err(Error::InsufficientData("fitted decays have no spread to standardize".into()));
    }
    Ok(xs.iter().map(|x| (x - m) / s).collect())
}

pub fn exp_estimate_distribution(config: &DistributionConfig) -> Result<DistributionOutcome> {
    if config.realizations < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 realizations, got {}",
            config.realizations
        )));
    }
    let k = config.realizations;
    let base = HawkesParams::univariate(config.mu, config.alpha, config.beta)?;
    let shifted = HawkesParams::univariate(config.mu, config.alpha, config.beta + config.increment)?;
    let stop = Stop::Horizon(config.horizon);
    let seeds = vec![sub_seed(config.seed, 1, 0), sub_seed(config.seed, 1, 1), sub_seed(config.seed, 1, 2)];

    let single = simulate_batch(&base, stop, k, seeds[0])?;
    let mut broken = simulate_batch(&base, stop, k / 2, seeds[1])?.into_streams();
    broken.extend(simulate_batch(&shifted, stop, k - k / 2, seeds[2])?.into_streams());

    let fit_single = sequential_estimates(&single, &config.fit, SequentialMode::Iid)?.values;
    let fit_break = sequential_estimates(&broken, &config.fit, SequentialMode::Iid)?.values;
    Ok(DistributionOutcome {
        ks_single: ks_one_sample(&standardize(&fit_single)?, standard_normal_cdf),
        ks_break: ks_one_sample(&standardize(&fit_break)?, standard_normal_cdf),
        beta_hat_single: fit_single,
        beta_hat_break: fit_break,
        seeds,
    })
}

impl Outcome for DistributionOutcome {
    fn tables(&self) -> Vec<Table> {
        let mut t = Table::new("estimates", &["case", "index", "beta_hat", "z"]);
        for (case, xs) in [("single", &self.beta_hat_single), ("break", &self.beta_hat_break)] {
            let z = standardize(xs).unwrap_or_else(|_| vec![f64::NAN; xs.len()]);
            for (i, (x, z)) in xs.iter().zip(z).enumerate() {
                t.push(row![case, i, x, z]);
            }
        }
        let mut s = Table::new("ks_to_gaussian", &["case", "ks"]);
        s.push(row!["single", self.ks_single]);
        s.push(row!["break", self.ks_break]);
        vec![t, s]
    }

    fn seeds(&self) -> Vec<u64> {
        self.seeds.clone()
    }

    fn ci_method(&self) -> &'static str {
        "none"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> DistributionConfig {
        DistributionConfig {
            realizations: 40,
            horizon: 300.0,
            ..DistributionConfig::for_scale(Scale::Desk, seed)
        }
    }

    #[test]
    fn zero_realizations_is_an_error() {
        let c = DistributionConfig {
            realizations: 0,
            ..small(1)
        };
        assert!(exp_estimate_distribution(&c).is_err());
    }

    #[test]
    fn deterministic_and_standardized() {
        let a = exp_estimate_distribution(&small(9)).unwrap();
        let b = exp_estimate_distribution(&small(9)).unwrap();
        assert_eq!(a, b);
        let z = standardize(&a.beta_hat_single).unwrap();
        assert!(mean(&z).abs() < 1e-12);
        assert!((std_dev(&z) - 1.0).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&a.ks_break));
    }
}
