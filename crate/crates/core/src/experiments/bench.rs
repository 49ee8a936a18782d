//! Estimator comparison on random stationary two-dimensional processes,
//! with fixed-decay baselines.
//!
//! Per process, `realizations` streams are used for fitting and one more is
//! held out. The K-S column compares inter-event times of a stream simulated
//! from the fitted parameters with those of the held-out stream; every entry
//! of a process simulates with the same seed.

use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mean_ci, metric_ks, rmse_ci, row, sub_seed, MeanCi, Outcome, Scale, Table};
use crate::estimators::{fit_decay, fit_mu_alpha, FitConfig, FitMethod};
use crate::model::{is_stationary, spectral_radius, Matrix};
use crate::sim::{simulate, simulate_batch, SimSpec, Stop};
use crate::{rng_from_seed, Error, EventStream, HawkesParams, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// The true decay.
    GivenBeta,
    /// Twice the true decay.
    WrongBeta,
    /// Ten times the true decay.
    WrongBetaPlus,
    /// A hundred times the true decay.
    WrongBetaPlusPlus,
}

impl Baseline {
    pub const ALL: [Baseline; 4] = [Self::GivenBeta, Self::WrongBeta, Self::WrongBetaPlus, Self::WrongBetaPlusPlus];

    pub fn factor(self) -> f64 {
        match self {
            Self::GivenBeta => 1.0,
            Self::WrongBeta => 2.0,
            Self::WrongBetaPlus => 10.0,
            Self::WrongBetaPlusPlus => 100.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::GivenBeta => "given-beta",
            Self::WrongBeta => "wrong-beta",
            Self::WrongBetaPlus => "wrong-beta+",
            Self::WrongBetaPlusPlus => "wrong-beta++",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub processes: usize,
    pub realizations: usize,
    pub horizon: f64,
    pub mu_range: [f64; 2],
    pub alpha_range: [f64; 2],
    pub beta_range: [f64; 2],
    /// Parameter draws with spectral radius at or above this are rejected.
    pub max_radius: f64,
    pub methods: Vec<FitMethod>,
    pub baselines: Vec<Baseline>,
    pub fit: FitConfig,
    pub seed: u64,
}

impl BenchConfig {
    pub fn for_scale(scale: Scale, seed: u64) -> Self {
        Self {
            processes: match scale {
                Scale::Desk => 10,
                Scale::Paper => 100,
            },
            realizations: 5,
            horizon: 200.0,
            mu_range: [0.05, 1.0],
            alpha_range: [0.0, 1.0],
            beta_range: [0.5, 5.0],
            max_radius: 0.95,
            methods: FitMethod::ALL.to_vec(),
            baselines: Baseline::ALL.to_vec(),
            fit: FitConfig::default(),
            seed,
        }
    }
}

/// One estimator or baseline on one process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub process: usize,
    pub entry: String,
    pub true_beta: f64,
    pub beta: f64,
    /// Training log-likelihood per event.
    pub loglik_per_event: f64,
    pub ks: f64,
    /// The fitted parameters were not stationary; K-S is set to 1.
    pub nonstationary_fit: bool,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub entry: String,
    pub loglik_per_event: MeanCi,
    pub ks: MeanCi,
    /// RMSE of the decay against the truth.
    pub rmse: MeanCi,
    pub runtime: MeanCi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutcome {
    pub params: Vec<crate::model::ParamsDoc>,
    pub rows: Vec<BenchRow>,
    pub runs: Vec<BenchRun>,
    pub seeds: Vec<u64>,
}

impl BenchOutcome {
    pub fn row(&self, entry: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.entry == entry)
    }
}

/// Draws parameters until the spectral radius is below `max_radius`.
pub(crate) fn sample_params(config: &BenchConfig, seed: u64) -> Result<HawkesParams> {
    let mut rng = rng_from_seed(seed);
    let u = |rng: &mut crate::Rng, r: [f64; 2]| rng.random_range(r[0]..r[1]);
    for _ in 0..100_000 {
        let mu = vec![u(&mut rng, config.mu_range), u(&mut rng, config.mu_range)];
        let alpha = Matrix::from_flat(2, (0..4).map(|_| u(&mut rng, config.alpha_range)).collect());
        let beta = u(&mut rng, config.beta_range);
        let params = HawkesParams::shared(mu, alpha, beta)?;
        if spectral_radius(&params) < config.max_radius {
            return Ok(params);
        }
    }
    Err(Error::InvalidConfig("parameter ranges almost never give a stationary process".into()))
}

fn gaps(stream: &EventStream) -> Vec<f64> {
    stream.times().windows(2).map(|w| w[1] - w[0]).collect()
}

fn run_process(config: &BenchConfig, p: usize) -> Result<(HawkesParams, u64, Vec<BenchRun>)> {
    let seed = sub_seed(config.seed, 200, p as u64);
    let truth = sample_params(config, seed)?;
    let true_beta = truth.shared_beta().expect("shared decay");
    let mut all = simulate_batch(&truth, Stop::Horizon(config.horizon), config.realizations + 1, seed)?.into_streams();
    let held_out = all.pop().expect("at least one stream");
    let train = all;
    let n_events: usize = train.iter().map(EventStream::len).sum();
    let held_gaps = gaps(&held_out);
    let replay_seed = seed.wrapping_add(config.realizations as u64 + 1);

    let score = |entry: String, params: HawkesParams, loglik: f64, runtime: f64| -> Result<BenchRun> {
        let stationary = is_stationary(&params);
        let ks = if stationary {
            let sim = simulate(&SimSpec::new(params.clone(), Stop::Horizon(config.horizon), replay_seed))?;
            metric_ks(&gaps(&sim), &held_gaps).unwrap_or(1.0)
        } else {
            1.0
        };
        Ok(BenchRun {
            process: p,
            entry,
            true_beta,
            beta: params.shared_beta().expect("shared decay"),
            loglik_per_event: loglik / n_events.max(1) as f64,
            ks,
            nonstationary_fit: !stationary,
            runtime_seconds: runtime,
        })
    };

    let mut runs = Vec::new();
    for &method in &config.methods {
        let fc = FitConfig {
            method,
            seed,
            ..config.fit.clone()
        };
        let t0 = Instant::now();
        let fit = fit_decay(&train, &fc)?;
        let runtime = t0.elapsed().as_secs_f64();
        let params = HawkesParams::shared(fit.mu.clone(), fit.alpha.clone(), fit.beta)?;
        runs.push(score(method.name().to_string(), params, fit.loglik, runtime)?);
    }
    for &b in &config.baselines {
        let beta = true_beta * b.factor();
        let t0 = Instant::now();
        let fit = fit_mu_alpha(&train, beta)?;
        let runtime = t0.elapsed().as_secs_f64();
        let params = HawkesParams::shared(fit.mu.clone(), fit.alpha.clone(), beta)?;
        runs.push(score(b.name().to_string(), params, fit.loglik, runtime)?);
    }
    Ok((truth, seed, runs))
}

pub fn exp_estimator_bench(config: &BenchConfig) -> Result<BenchOutcome> {
    if config.processes == 0 || config.realizations == 0 {
        return Err(Error::InvalidConfig("need at least one process and one realization".into()));
    }
    let results = (0..config.processes)
        .into_par_iter()
        .map(|p| run_process(config, p))
        .collect::<Result<Vec<_>>>()?;
    let mut params = Vec::new();
    let mut seeds = Vec::new();
    let mut runs = Vec::new();
    for (p, s, r) in results {
        params.push(p.to_doc());
        seeds.push(s);
        runs.extend(r);
    }
    let entries: Vec<String> = config
        .methods
        .iter()
        .map(|m| m.name().to_string())
        .chain(config.baselines.iter().map(|b| b.name().to_string()))
        .collect();
    let rows = entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mine: Vec<&BenchRun> = runs.iter().filter(|r| &r.entry == e).collect();
            let col = |f: fn(&BenchRun) -> f64| mine.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let ci_seed = sub_seed(config.seed, 300, i as u64);
            Ok(BenchRow {
                entry: e.clone(),
                loglik_per_event: mean_ci(&col(|r| r.loglik_per_event), ci_seed)?,
                ks: mean_ci(&col(|r| r.ks), ci_seed + 1)?,
                rmse: rmse_ci(&col(|r| r.beta - r.true_beta), ci_seed + 2)?,
                runtime: mean_ci(&col(|r| r.runtime_seconds), ci_seed + 3)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(BenchOutcome { params, rows, runs, seeds })
}

impl Outcome for BenchOutcome {
    fn tables(&self) -> Vec<Table> {
        let mut summary = Table::new(
            "summary",
            &[
                "entry",
                "loglik_per_event",
                "loglik_ci_low",
                "loglik_ci_high",
                "ks",
                "ks_ci_low",
                "ks_ci_high",
                "rmse",
                "rmse_ci_low",
                "rmse_ci_high",
                "runtime_seconds",
                "runtime_ci_low",
                "runtime_ci_high",
            ],
        );
        for r in &self.rows {
            summary.push(row![
                r.entry,
                r.loglik_per_event.mean,
                r.loglik_per_event.ci_low,
                r.loglik_per_event.ci_high,
                r.ks.mean,
                r.ks.ci_low,
                r.ks.ci_high,
                r.rmse.mean,
                r.rmse.ci_low,
                r.rmse.ci_high,
                r.runtime.mean,
                r.runtime.ci_low,
                r.runtime.ci_high
            ]);
        }
        let mut runs = Table::new(
            "runs",
            &["process", "entry", "true_beta", "beta", "loglik_per_event", "ks", "nonstationary_fit", "runtime_seconds"],
        );
        for r in &self.runs {
            runs.push(row![
                r.process,
                r.entry,
                r.true_beta,
                r.beta,
                r.loglik_per_event,
                r.ks,
                r.nonstationary_fit,
                r.runtime_seconds
            ]);
        }
        vec![summary, runs]
    }

    fn seeds(&self) -> Vec<u64> {
        self.seeds.clone()
    }

    fn ci_method(&self) -> &'static str {
        "bayesian bootstrap over processes"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_parameters_are_stationary_and_in_range() {
        let c = BenchConfig::for_scale(Scale::Desk, 0);
        for s in 0..50 {
            let p = sample_params(&c, s).unwrap();
            assert!(spectral_radius(&p) < 0.95);
            assert!(p.mu().iter().all(|m| (0.05..1.0).contains(m)));
            let b = p.shared_beta().unwrap();
            assert!((0.5..5.0).contains(&b));
        }
    }

    #[test]
    fn given_beta_has_zero_rmse() {
        let c = BenchConfig {
            processes: 2,
            realizations: 2,
            horizon: 100.0,
            methods: vec![FitMethod::Grid],
            ..BenchConfig::for_scale(Scale::Desk, 5)
        };
        let out = exp_estimator_bench(&c).unwrap();
        assert_eq!(out.row("given-beta").unwrap().rmse.mean, 0.0);
        assert_eq!(out.runs.len(), 2 * 5);
        assert!(out.runs.iter().all(|r| (0.0..=1.0).contains(&r.ks)));
    }
}
