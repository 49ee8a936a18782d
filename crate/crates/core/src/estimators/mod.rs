//! Decay estimators.
//!
//! All estimators fit a single decay shared by every pair of dimensions and
//! pool the given realizations. `grid` and `smbo` search the profile
//! likelihood, where the baseline and excitation are refit by
//! [`fit_mu_alpha`] at each candidate decay; `nonlinear` optimizes all
//! parameters jointly; `em` runs branching-structure expectation
//! maximization.

mod convex;
mod em;
mod grid;
pub mod lbfgsb;
mod nonlinear;
mod pooled;
mod smbo;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use convex::{fit_mu_alpha, MuAlphaFit};
pub use em::fit_decay_em;
pub use grid::fit_decay_grid;
pub use nonlinear::fit_decay_nonlinear;
pub use smbo::fit_decay_smbo;

use crate::model::{EventStream, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Nonlinear,
    Grid,
    Smbo,
    Em,
}

impl FitMethod {
    pub const ALL: [FitMethod; 4] = [FitMethod::Nonlinear, FitMethod::Grid, FitMethod::Smbo, FitMethod::Em];

    pub fn name(self) -> &'static str {
        match self {
            FitMethod::Nonlinear => "nonlinear",
            FitMethod::Grid => "grid",
            FitMethod::Smbo => "smbo",
            FitMethod::Em => "em",
        }
    }
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FitMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

/// Log-spaced grid `10^linspace(log10_lo, log10_hi, count)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub count: usize,
    pub log10_lo: f64,
    pub log10_hi: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            count: 10,
            log10_lo: -1.0,
            log10_hi: 2.0,
        }
    }
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        crate::likelihood::log_grid(self.count, self.log10_lo, self.log10_hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmSpec {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for EmSpec {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub method: FitMethod,
    pub bounds: [f64; 2],
    /// Profile evaluations for `smbo`.
    pub budget: usize,
    pub grid: GridSpec,
    pub em: EmSpec,
    /// Starting decay; 1.0 when absent.
    pub init: Option<f64>,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            method: FitMethod::Nonlinear,
            bounds: [1e-3, 1e3],
            budget: 50,
            grid: GridSpec::default(),
            em: EmSpec::default(),
            init: None,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn new(method: FitMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.bounds;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(Error::InvalidConfig(format!("bounds must satisfy 0 < lo < hi, got [{lo}, {hi}]")));
        }
        if self.budget == 0 {
            return Err(Error::InvalidConfig("budget must be at least 1".into()));
        }
        if self.grid.count < 2 {
            return Err(Error::InvalidConfig("grid count must be at least 2".into()));
        }
        if !(self.grid.log10_lo.is_finite() && self.grid.log10_hi.is_finite() && self.grid.log10_lo < self.grid.log10_hi)
        {
            return Err(Error::InvalidConfig("grid exponents must be finite and increasing".into()));
        }
        if !(self.em.tol > 0.0) || self.em.max_iters == 0 {
            return Err(Error::InvalidConfig("em tol must be positive and max_iters at least 1".into()));
        }
        if let Some(b) = self.init {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::InvalidConfig(format!("init must be a positive decay, got {b}")));
            }
        }
        Ok(())
    }

    /// Starting decay clamped into the bounds.
    pub fn start(&self) -> f64 {
        self.init.unwrap_or(1.0).clamp(self.bounds[0], self.bounds[1])
    }
}

/// Outcome of one decay fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub method: FitMethod,
    pub beta: f64,
    pub mu: Vec<f64>,
    pub alpha: Matrix,
    /// Pooled log-likelihood at the returned parameters.
    pub loglik: f64,
    pub converged: bool,
    /// The decay sits on a box bound.
    pub at_bound: bool,
    /// Number of log-likelihood (or profile) evaluations spent.
    pub evaluations: usize,
}

pub(crate) fn on_bound(beta: f64, bounds: [f64; 2]) -> bool {
    (beta - bounds[0]).abs() <= 1e-9 * bounds[0] || (bounds[1] - beta).abs() <= 1e-9 * bounds[1]
}

/// Fits the decay with the configured method.
pub fn fit_decay(streams: &[EventStream], config: &FitConfig) -> Result<DecayFit> {
    match config.method {
        FitMethod::Nonlinear => fit_decay_nonlinear(streams, config),
        FitMethod::Grid => fit_decay_grid(streams, config),
        FitMethod::Smbo => fit_decay_smbo(streams, config),
        FitMethod::Em => fit_decay_em(streams, config),
    }
}

/// How `β̂_k` relates to the realizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequentialMode {
    /// `β̂_k` is fitted on the first `k` realizations.
    #[default]
    Pooled,
    /// `β̂_k` is fitted on realization `k` alone.
    Iid,
}

impl std::str::FromStr for SequentialMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pooled" => Ok(Self::Pooled),
            "iid" => Ok(Self::Iid),
            _ => Err(Error::InvalidConfig(format!("unknown sequential mode {s:?}"))),
        }
    }
}

/// An ordered sequence of decay estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimates {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// Realizations behind each value.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub realizations_used: Vec<usize>,
}

impl DecayEstimates {
    /// Estimates from an external source; every value must be positive and finite.
    pub fn new(values: Vec<f64>, method: Option<String>) -> Result<Self> {
        let est = Self {
            values,
            method,
            realizations_used: Vec::new(),
        };
        est.check()?;
        Ok(est)
    }

    pub fn check(&self) -> Result<()> {
        if let Some((index, &value)) = self.values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::NonPositiveEstimate { index, value });
        }
        if !self.realizations_used.is_empty() && self.realizations_used.len() != self.values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values but {} realization counts",
                self.values.len(),
                self.realizations_used.len()
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

impl AsRef<[f64]> for DecayEstimates {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Fits `β̂_1, …, β̂_K` over the realizations in order.
pub fn sequential_estimates(streams: &[EventStream], config: &FitConfig, mode: SequentialMode) -> Result<DecayEstimates> {
    let fits = sequential_fits(streams, config, mode)?;
    let realizations_used = match mode {
        SequentialMode::Pooled => (1..=streams.len()).collect(),
        SequentialMode::Iid => vec![1; streams.len()],
    };
    Ok(DecayEstimates {
        values: fits.iter().map(|f| f.beta).collect(),
        method: Some(config.method.name().to_string()),
        realizations_used,
    })
}

/// The fits behind [`sequential_estimates`].
pub fn sequential_fits(streams: &[EventStream], config: &FitConfig, mode: SequentialMode) -> Result<Vec<DecayFit>> {
    config.validate()?;
    crate::model::check_streams(streams)?;
    (0..streams.len())
        .into_par_iter()
        .map(|k| match mode {
            SequentialMode::Pooled => fit_decay(&streams[..=k], config),
            SequentialMode::Iid => fit_decay(&streams[k..=k], config),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HawkesParams;
    use crate::sim::{simulate_batch, Stop};

    #[test]
    fn config_validation() {
        assert!(FitConfig::default().validate().is_ok());
        let mut c = FitConfig::default();
        c.bounds = [2.0, 1.0];
        assert!(c.validate().is_err());
        let mut c = FitConfig::default();
        c.grid.count = 1;
        assert!(c.validate().is_err());
        let mut c = FitConfig::default();
        c.budget = 0;
        assert!(c.validate().is_err());
        let mut c = FitConfig::default();
        c.em.tol = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn estimates_json_shape() {
        let e = DecayEstimates::new(vec![1.0, 2.5], Some("grid".into())).unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"values":[1.0,2.5],"method":"grid"}"#);
        let back: DecayEstimates = serde_json::from_str(r#"{"values":[0.5]}"#).unwrap();
        assert_eq!(back.values, [0.5]);
        assert!(matches!(
            DecayEstimates::new(vec![1.0, 0.0], None),
            Err(Error::NonPositiveEstimate { index: 1, .. })
        ));
    }

    #[test]
    fn method_names_round_trip() {
        for m in FitMethod::ALL {
            assert_eq!(m.name().parse::<FitMethod>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
    }

    #[test]
    fn sequential_single_equals_direct_fit() {
        let p = HawkesParams::univariate(1.2, 0.6, 0.8).unwrap();
        let set = simulate_batch(&p, Stop::Count(100), 3, 5).unwrap();
        let cfg = FitConfig::new(FitMethod::Grid);
        let est = sequential_estimates(&set[..1], &cfg, SequentialMode::Pooled).unwrap();
        assert_eq!(est.values, [fit_decay(&set[..1], &cfg).unwrap().beta]);
        let iid = sequential_estimates(&set, &cfg, SequentialMode::Iid).unwrap();
        assert_eq!(iid.realizations_used, [1, 1, 1]);
        assert_eq!(iid.values[2], fit_decay(&set[2..3], &cfg).unwrap().beta);
        let pooled = sequential_estimates(&set, &cfg, SequentialMode::Pooled).unwrap();
        assert_eq!(pooled.realizations_used, [1, 2, 3]);
        assert_eq!(pooled.values[2], fit_decay(&set, &cfg).unwrap().beta);
    }
}
