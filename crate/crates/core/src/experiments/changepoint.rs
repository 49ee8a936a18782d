//! Recovering a decay break from the sequence of fitted decays.
//!
//! Realization `k = 1..K` is simulated with decay `β` for `k < k*` and
//! `β + increment` from `k*` on. The fitted sequence feeds the changepoint
//! sampler; a run is scored on the ordering `β̄1 < β̄2` and on whether `κ̂`
//! lands within `window` of `k*`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{proportion_ci, rmse_ci, row, sub_seed, MeanCi, Outcome, Scale, Table};
use crate::changepoint::{mcmc, ChangepointModel, McmcConfig};
use crate::estimators::{sequential_estimates, FitConfig, FitMethod, SequentialMode};
use crate::sim::{simulate, SimSpec, Stop};
use crate::{Error, HawkesParams, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointExpConfig {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub increment: f64,
    /// Break positions to run; each is 1-based.
    pub kstars: Vec<usize>,
    pub realizations: usize,
    pub events_per_realization: usize,
    pub methods: Vec<FitMethod>,
    pub fit: FitConfig,
    pub mode: SequentialMode,
    pub model: ChangepointModel,
    /// Sampler settings; the seed is replaced per run.
    pub mcmc: McmcConfig,
    /// Half-width of the `κ̂` acceptance window around `k*`.
    pub window: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl ChangepointExpConfig {
    pub fn for_scale(scale: Scale, seed: u64) -> Self {
        Self {
            mu: 1.2,
            alpha: 0.6,
            beta: 0.8,
            increment: 1.0,
            kstars: vec![50],
            realizations: 100,
            events_per_realization: 100,
            methods: vec![FitMethod::Nonlinear, FitMethod::Grid, FitMethod::Smbo],
            fit: FitConfig::default(),
            mode: SequentialMode::Pooled,
            model: ChangepointModel { rate1: 1.0, rate2: 0.7 },
            mcmc: McmcConfig::default(),
            window: 10,
            repetitions: match scale {
                Scale::Desk => 20,
                Scale::Paper => 100,
            },
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointRun {
    pub kstar: usize,
    pub repetition: usize,
    pub method: FitMethod,
    pub seed: u64,
    pub beta1_mean: f64,
    pub beta2_mean: f64,
    pub kappa_median: usize,
    pub increasing: bool,
    pub in_window: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointRow {
    pub kstar: usize,
    pub method: FitMethod,
    pub rmse_beta1: MeanCi,
    pub rmse_beta2: MeanCi,
    /// RMSE of `κ̂/K` against `k*/K`.
    pub rmse_kappa: MeanCi,
    pub ordering_accuracy: MeanCi,
    pub kappa_in_window: MeanCi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointOutcome {
    pub rows: Vec<ChangepointRow>,
    pub runs: Vec<ChangepointRun>,
}

impl ChangepointOutcome {
    pub fn row(&self, kstar: usize, method: FitMethod) -> Option<&ChangepointRow> {
        self.rows.iter().find(|r| r.kstar == kstar && r.method == method)
    }
}

fn run_repetition(config: &ChangepointExpConfig, kstar: usize, r: usize, seed: u64) -> Result<Vec<ChangepointRun>> {
    let before = HawkesParams::univariate(config.mu, config.alpha, config.beta)?;
    let after = HawkesParams::univariate(config.mu, config.alpha, config.beta + config.increment)?;
    let streams = (1..=config.realizations)
        .into_par_iter()
        .map(|k| {
            let params = if k < kstar { before.clone() } else { after.clone() };
            let spec = SimSpec::new(params, Stop::Count(config.events_per_realization), seed.wrapping_add(k as u64));
            Ok(simulate(&spec)?.with_id(k.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let lo = kstar.saturating_sub(config.window);
    let hi = kstar + config.window;
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
            let post = mcmc(&est, &config.model, &McmcConfig { seed, ..config.mcmc })?;
            let s = post.summarize();
            Ok(ChangepointRun {
                kstar,
                repetition: r,
                method,
                seed,
                beta1_mean: s.beta1_mean,
                beta2_mean: s.beta2_mean,
                kappa_median: s.kappa_median,
                increasing: s.increasing,
                in_window: (lo..=hi).contains(&s.kappa_median),
            })
        })
        .collect()
}

pub fn exp_changepoint(config: &ChangepointExpConfig) -> Result<ChangepointOutcome> {
    if config.repetitions == 0 || config.methods.is_empty() || config.kstars.is_empty() {
        return Err(Error::InvalidConfig("need repetitions, methods and break positions".into()));
    }
    if let Some(&bad) = config.kstars.iter().find(|&&k| k < 2 || k > config.realizations) {
        return Err(Error::InvalidConfig(format!(
            "break position {bad} must lie in 2..={}",
            config.realizations
        )));
    }
    let tasks: Vec<(usize, usize, usize)> = config
        .kstars
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| (0..config.repetitions).map(move |r| (i, k, r)))
        .collect();
    let runs: Vec<ChangepointRun> = tasks
        .par_iter()
        .map(|&(i, kstar, r)| run_repetition(config, kstar, r, sub_seed(config.seed, 6 + i as u64, r as u64)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let k = config.realizations as f64;
    let mut rows = Vec::new();
    for (i, &kstar) in config.kstars.iter().enumerate() {
        for (j, &method) in config.methods.iter().enumerate() {
            let mine: Vec<&ChangepointRun> = runs.iter().filter(|r| r.kstar == kstar && r.method == method).collect();
            let ci_seed = sub_seed(config.seed, 100 + i as u64, j as u64);
            let e1: Vec<f64> = mine.iter().map(|r| r.beta1_mean - config.beta).collect();
            let e2: Vec<f64> = mine.iter().map(|r| r.beta2_mean - config.beta - config.increment).collect();
            let ek: Vec<f64> = mine.iter().map(|r| (r.kappa_median as f64 - kstar as f64) / k).collect();
            let ord: Vec<f64> = mine.iter().map(|r| f64::from(u8::from(r.increasing))).collect();
            let win: Vec<f64> = mine.iter().map(|r| f64::from(u8::from(r.in_window))).collect();
            rows.push(ChangepointRow {
                kstar,
                method,
                rmse_beta1: rmse_ci(&e1, ci_seed)?,
                rmse_beta2: rmse_ci(&e2, ci_seed + 1)?,
                rmse_kappa: rmse_ci(&ek, ci_seed + 2)?,
                ordering_accuracy: proportion_ci(&ord, ci_seed + 3)?,
                kappa_in_window: proportion_ci(&win, ci_seed + 4)?,
            });
        }
    }
    Ok(ChangepointOutcome { rows, runs })
}

impl Outcome for ChangepointOutcome {
    fn tables(&self) -> Vec<Table> {
        let mut summary = Table::new(
            "summary",
            &[
                "kstar",
                "method",
                "rmse_beta1",
                "rmse_beta2",
                "rmse_kappa",
                "ordering_accuracy",
                "ordering_ci_low",
                "ordering_ci_high",
                "kappa_in_window",
                "window_ci_low",
                "window_ci_high",
            ],
        );
        for r in &self.rows {
            summary.push(row![
                r.kstar,
                r.method.name(),
                r.rmse_beta1.mean,
                r.rmse_beta2.mean,
                r.rmse_kappa.mean,
                r.ordering_accuracy.mean,
                r.ordering_accuracy.ci_low,
                r.ordering_accuracy.ci_high,
                r.kappa_in_window.mean,
                r.kappa_in_window.ci_low,
                r.kappa_in_window.ci_high
            ]);
        }
        let mut runs = Table::new(
            "runs",
            &["kstar", "repetition", "method", "seed", "beta1_mean", "beta2_mean", "kappa_median", "increasing", "in_window"],
        );
        for r in &self.runs {
            runs.push(row![
                r.kstar,
                r.repetition,
                r.method.name(),
                r.seed,
                r.beta1_mean,
                r.beta2_mean,
                r.kappa_median,
                r.increasing,
                r.in_window
            ]);
        }
        vec![summary, runs]
    }

    fn seeds(&self) -> Vec<u64> {
        let mut s: Vec<u64> = self.runs.iter().map(|r| r.seed).collect();
        s.dedup();
        s
    }

    fn ci_method(&self) -> &'static str {
        "bayesian bootstrap (rmse), empirical bootstrap (proportions)"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(seed: u64) -> ChangepointExpConfig {
        ChangepointExpConfig {
            realizations: 12,
            kstars: vec![6],
            repetitions: 2,
            methods: vec![FitMethod::Grid],
            mode: SequentialMode::Iid,
            mcmc: McmcConfig {
                n_samples: 2000,
                ..McmcConfig::default()
            },
            ..ChangepointExpConfig::for_scale(Scale::Desk, seed)
        }
    }

    #[test]
    fn reduced_run_is_deterministic() {
        let out = exp_changepoint(&tiny(3)).unwrap();
        assert_eq!(out.runs.len(), 2);
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out, exp_changepoint(&tiny(3)).unwrap());
    }

    #[test]
    fn break_outside_sequence_rejected() {
        let c = ChangepointExpConfig {
            kstars: vec![13],
            ..tiny(3)
        };
        assert!(exp_changepoint(&c).is_err());
    }
}
