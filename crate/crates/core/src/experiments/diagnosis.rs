//! Diagnosing a misaligned decay hypothesis with the predictive mean.
//!
//! Each repetition simulates `K` univariate realizations of a fixed length,
//! fits the decay sequence with every estimator on the same data, and records
//! `β′` under the prior `Gamma(K, b0)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mean_ci, rmse_ci, row, sub_seed, MeanCi, Outcome, Scale, Table};
use crate::bayes::{predictive_mean_paper, GammaExpModel};
use crate::estimators::{sequential_estimates, FitConfig, FitMethod, SequentialMode};
use crate::sim::{simulate_batch, Stop};
use crate::{Error, HawkesParams, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisConfig {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub realizations: usize,
    pub events_per_realization: usize,
    pub methods: Vec<FitMethod>,
    /// Shared estimator settings; the method and seed are set per run.
    pub fit: FitConfig,
    pub mode: SequentialMode,
    pub b0: f64,
    pub repetitions: usize,
    pub seed: u64,
}

impl DiagnosisConfig {
    pub fn for_scale(scale: Scale, seed: u64) -> Self {
        Self {
            mu: 1.2,
            alpha: 0.6,
            beta: 0.8,
            realizations: 100,
            events_per_realization: 100,
            methods: vec![FitMethod::Nonlinear, FitMethod::Grid, FitMethod::Smbo],
            fit: FitConfig::default(),
            mode: SequentialMode::Pooled,
            b0: 1.0,
            repetitions: match scale {
                Scale::Desk => 10,
                Scale::Paper => 100,
            },
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisRun {
    pub repetition: usize,
    pub method: FitMethod,
    pub seed: u64,
    pub mean_estimate: f64,
    pub beta_prime: f64,
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisRow {
    pub method: FitMethod,
    /// RMSE of `β′` against the true decay across repetitions.
    pub rmse: MeanCi,
    /// `b0 - β′` averaged across repetitions.
    pub shift: MeanCi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisOutcome {
    pub rows: Vec<DiagnosisRow>,
    pub runs: Vec<DiagnosisRun>,
}

impl DiagnosisOutcome {
    pub fn row(&self, method: FitMethod) -> Option<&DiagnosisRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

pub fn exp_diagnosis(config: &DiagnosisConfig) -> Result<DiagnosisOutcome> {
    if config.repetitions == 0 || config.methods.is_empty() {
        return Err(Error::InvalidConfig("need at least one repetition and one method".into()));
    }
    let params = HawkesParams::univariate(config.mu, config.alpha, config.beta)?;
    let runs: Vec<Vec<DiagnosisRun>> = (0..config.repetitions)
        .into_par_iter()
        .map(|r| {
            let seed = sub_seed(config.seed, 4, r as u64);
            let streams = simulate_batch(&params, Stop::Count(config.events_per_realization), config.realizations, seed)?;
            config
                .methods
                .iter()
                .map(|&method| {
                    let fit = FitConfig {
                        method,
                        seed,
                        ..config.fit.clone()
                    };
                    let est = sequential_estimates(&streams, &fit, config.mode)?;
                    let model = GammaExpModel::with_default_shape(config.b0, &est)?;
                    let beta_prime = predictive_mean_paper(&model, &est)?;
                    Ok(DiagnosisRun {
                        repetition: r,
                        method,
                        seed,
                        mean_estimate: est.sum() / est.len() as f64,
                        beta_prime,
                        shift: config.b0 - beta_prime,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let runs: Vec<DiagnosisRun> = runs.into_iter().flatten().collect();

    let rows = config
        .methods
        .iter()
        .enumerate()
        .map(|(i, &method)| {
            let mine: Vec<&DiagnosisRun> = runs.iter().filter(|r| r.method == method).collect();
            let errors: Vec<f64> = mine.iter().map(|r| r.beta_prime - config.beta).collect();
            let shifts: Vec<f64> = mine.iter().map(|r| r.shift).collect();
            let ci_seed = sub_seed(config.seed, 5, i as u64);
            Ok(DiagnosisRow {
                method,
                rmse: rmse_ci(&errors, ci_seed)?,
                shift: mean_ci(&shifts, ci_seed + 1)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DiagnosisOutcome { rows, runs })
}

impl Outcome for DiagnosisOutcome {
    fn tables(&self) -> Vec<Table> {
        let mut summary = Table::new(
            "summary",
            &["method", "rmse", "rmse_ci_low", "rmse_ci_high", "shift", "shift_ci_low", "shift_ci_high"],
        );
        for r in &self.rows {
            summary.push(row![
                r.method.name(),
                r.rmse.mean,
                r.rmse.ci_low,
                r.rmse.ci_high,
                r.shift.mean,
                r.shift.ci_low,
                r.shift.ci_high
            ]);
        }
        let mut runs = Table::new("runs", &["repetition", "method", "seed", "mean_estimate", "beta_prime", "shift"]);
        for r in &self.runs {
            runs.push(row![r.repetition, r.method.name(), r.seed, r.mean_estimate, r.beta_prime, r.shift]);
        }
        vec![summary, runs]
    }

    fn seeds(&self) -> Vec<u64> {
        let mut s: Vec<u64> = self.runs.iter().map(|r| r.seed).collect();
        s.dedup();
        s
    }

    fn ci_method(&self) -> &'static str {
        "bayesian bootstrap over repetitions"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_run_shapes() {
        let c = DiagnosisConfig {
            realizations: 6,
            repetitions: 2,
            methods: vec![FitMethod::Grid],
            ..DiagnosisConfig::for_scale(Scale::Desk, 7)
        };
        let out = exp_diagnosis(&c).unwrap();
        assert_eq!(out.runs.len(), 2);
        let row = out.row(FitMethod::Grid).unwrap();
        assert!(row.rmse.ci_low <= row.rmse.mean && row.rmse.mean <= row.rmse.ci_high);
        for r in &out.runs {
            // β′ = (b0 + Σβ̂)/(K - 1) with a0 = K.
            let k = c.realizations as f64;
            assert!((r.beta_prime - (1.0 + k * r.mean_estimate) / (k - 1.0)).abs() < 1e-12);
        }
        assert_eq!(out, exp_diagnosis(&c).unwrap());
    }

    #[test]
    fn zero_repetitions_rejected() {
        let c = DiagnosisConfig {
            repetitions: 0,
            ..DiagnosisConfig::for_scale(Scale::Desk, 7)
        };
        assert!(exp_diagnosis(&c).is_err());
    }
}
