//! Negative log-likelihood curves over decay ranges around the true value.

use serde::{Deserialize, Serialize};

use super::{row, sub_seed, Outcome, Scale, Table};
use crate::likelihood::{linear_grid, log_grid, loglik_scan, negloglik_table, ScanResult};
use crate::sim::{simulate_batch, Stop};
use crate::{HawkesParams, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub horizon: f64,
    pub realizations: usize,
    pub large_grid: Vec<f64>,
    pub medium_grid: Vec<f64>,
    pub small_grid: Vec<f64>,
    pub seed: u64,
}

impl ScanConfig {
    pub fn for_scale(_scale: Scale, seed: u64) -> Self {
        Self {
            mu: 0.1,
            alpha: 0.5,
            beta: 1.2,
            horizon: 1000.0,
            realizations: 100,
            large_grid: log_grid(60, -1.0, 2.0),
            medium_grid: linear_grid(37, 0.6, 2.4),
            small_grid: linear_grid(21, 1.1, 1.3),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOutcome {
    pub large: ScanResult,
    pub medium: ScanResult,
    pub small: ScanResult,
    /// Sign changes of the second differences of the large-range mean curve.
    pub curvature_sign_changes: usize,
    /// Mean of `μH - n ln μ` over realizations, the large-decay limit.
    pub tail_limit: f64,
    /// `|curve(β_max) - limit| / |limit|` on the large range.
    pub tail_relative_gap: f64,
    /// Per-realization argmin on the medium grid.
    pub medium_argmins: Vec<f64>,
    /// Medium-grid point nearest the true decay.
    pub medium_nearest_truth: f64,
    /// Share of realizations whose medium-grid argmin is not that point.
    pub fraction_argmin_off_truth: f64,
    pub seeds: Vec<u64>,
}

fn sign_changes(curve: &[f64]) -> usize {
    let d2: Vec<f64> = curve.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).filter(|d| *d != 0.0).collect();
    d2.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count()
}

pub fn exp_loglik_scan(config: &ScanConfig) -> Result<ScanOutcome> {
    let params = HawkesParams::univariate(config.mu, config.alpha, config.beta)?;
    let sim_seed = sub_seed(config.seed, 2, 0);
    let streams = simulate_batch(&params, Stop::Horizon(config.horizon), config.realizations, sim_seed)?;
    let boot_seed = sub_seed(config.seed, 2, 1);
    let large = loglik_scan(&params, &streams, &config.large_grid, boot_seed)?;
    let medium = loglik_scan(&params, &streams, &config.medium_grid, boot_seed)?;
    let small = loglik_scan(&params, &streams, &config.small_grid, boot_seed)?;

    let tail_limit = streams
        .iter()
        .map(|s| config.mu * s.horizon() - s.len() as f64 * config.mu.ln())
        .sum::<f64>()
        / streams.len() as f64;
    let last = *large.mean_negloglik.last().expect("grid is non-empty");

    let grid = &config.medium_grid;
    let nearest = grid
        .iter()
        .cloned()
        .min_by(|a, b| (a - config.beta).abs().total_cmp(&(b - config.beta).abs()))
        .expect("grid is non-empty");
    let table = negloglik_table(&params, &streams, grid)?;
    let medium_argmins: Vec<f64> = table.iter().map(|r| grid[crate::likelihood::argmin(r)]).collect();
    let off = medium_argmins.iter().filter(|&&b| b != nearest).count();

    Ok(ScanOutcome {
        curvature_sign_changes: sign_changes(&large.mean_negloglik),
        tail_limit,
        tail_relative_gap: (last - tail_limit).abs() / tail_limit.abs(),
        fraction_argmin_off_truth: off as f64 / medium_argmins.len() as f64,
        medium_argmins,
        medium_nearest_truth: nearest,
        large,
        medium,
        small,
        seeds: vec![sim_seed, boot_seed],
    })
}

impl Outcome for ScanOutcome {
    fn tables(&self) -> Vec<Table> {
        let mut curves = Table::new("curves", &["range", "beta", "mean_negloglik", "ci_low", "ci_high"]);
        for (name, s) in [("large", &self.large), ("medium", &self.medium), ("small", &self.small)] {
            for i in 0..s.beta_grid.len() {
                curves.push(row![name, s.beta_grid[i], s.mean_negloglik[i], s.ci_low[i], s.ci_high[i]]);
            }
        }
        let mut argmins = Table::new("medium_argmins", &["realization", "argmin_beta"]);
        for (k, b) in self.medium_argmins.iter().enumerate() {
            argmins.push(row![k, b]);
        }
        vec![curves, argmins]
    }

    fn seeds(&self) -> Vec<u64> {
        self.seeds.clone()
    }

    fn ci_method(&self) -> &'static str {
        "percentile bootstrap over realizations"
    }
}
