//! Scripted synthetic studies and the metrics they report.
//!
//! Each study is a pure function of its config (seed included). Studies come
//! at two scales: `desk` cuts outer repetition counts, `paper` uses the
//! original ones. Stream lengths are the same at both scales.

mod bench;
mod changepoint;
mod diagnosis;
mod distribution;
mod influence;
mod metrics;
mod scan;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use bench::{exp_estimator_bench, Baseline, BenchConfig, BenchOutcome, BenchRow, BenchRun};
pub use changepoint::{exp_changepoint, ChangepointExpConfig, ChangepointOutcome, ChangepointRow, ChangepointRun};
pub use diagnosis::{exp_diagnosis, DiagnosisConfig, DiagnosisOutcome, DiagnosisRow, DiagnosisRun};
pub use distribution::{exp_estimate_distribution, DistributionConfig, DistributionOutcome};
pub use influence::{exp_influence_direction, InfluenceConfig, InfluenceOutcome, InfluenceRow};
pub use metrics::{metric_ks, metric_ks_exp1, metric_rmse};
pub use scan::{exp_loglik_scan, ScanConfig, ScanOutcome};

use crate::bayes::{bayesian_bootstrap, empirical_bootstrap, weighted_mean};
use crate::{Error, Result};

pub const CI_LEVEL: f64 = 0.95;
pub const CI_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Desk,
    Paper,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Self::Desk),
            "paper" => Ok(Self::Paper),
            _ => Err(Error::InvalidConfig(format!("unknown scale {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    EstimateDist,
    LoglikScan,
    Influence,
    Diagnosis,
    Changepoint,
    Bench,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 6] = [
        Self::EstimateDist,
        Self::LoglikScan,
        Self::Influence,
        Self::Diagnosis,
        Self::Changepoint,
        Self::Bench,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::EstimateDist => "estimate-dist",
            Self::LoglikScan => "loglik-scan",
            Self::Influence => "influence",
            Self::Diagnosis => "diagnosis",
            Self::Changepoint => "changepoint",
            Self::Bench => "bench",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown experiment {s:?}")))
    }
}

/// A mean with its confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl MeanCi {
    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }

    pub fn width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

/// Bayesian-bootstrap mean of `xs`.
pub(crate) fn mean_ci(xs: &[f64], seed: u64) -> Result<MeanCi> {
    let iv = bayesian_bootstrap(xs, weighted_mean, CI_LEVEL, CI_RESAMPLES, seed)?;
    Ok(MeanCi {
        mean: crate::stats::mean(xs),
        ci_low: iv.low.min(iv.estimate),
        ci_high: iv.high.max(iv.estimate),
    })
}

/// Bayesian-bootstrap RMSE from per-repetition errors.
pub(crate) fn rmse_ci(errors: &[f64], seed: u64) -> Result<MeanCi> {
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let iv = bayesian_bootstrap(&sq, |x, w| weighted_mean(x, w).sqrt(), CI_LEVEL, CI_RESAMPLES, seed)?;
    let mean = crate::stats::mean(&sq).sqrt();
    Ok(MeanCi {
        mean,
        ci_low: iv.low.min(mean),
        ci_high: iv.high.max(mean),
    })
}

/// Empirical-bootstrap interval for a proportion, kept inside `[0, 1]`.
pub(crate) fn proportion_ci(hits: &[f64], seed: u64) -> Result<MeanCi> {
    let iv = empirical_bootstrap(hits, crate::stats::mean, CI_LEVEL, CI_RESAMPLES, seed)?;
    Ok(MeanCi {
        mean: iv.estimate,
        ci_low: iv.low.min(iv.estimate).max(0.0),
        ci_high: iv.high.max(iv.estimate).min(1.0),
    })
}

/// Seed for repetition `index` of sub-stream `stream`; far enough apart that
/// the `seed + k` batches underneath never overlap.
pub(crate) fn sub_seed(seed: u64, stream: u64, index: u64) -> u64 {
    seed.wrapping_add(stream << 40).wrapping_add(index << 16)
}

/// A named table that renders as CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let cell = |v: &Value| match v {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(cell).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

/// Builds a table row from heterogeneous values.
macro_rules! row {
    ($($v:expr),* $(,)?) => {
        vec![$(serde_json::json!($v)),*]
    };
}
pub(crate) use row;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub scale: Scale,
    pub seed: u64,
    /// Full configuration, derived grids included.
    pub config: Value,
    /// Seeds behind each repetition or condition, in order.
    pub seeds: Vec<u64>,
    /// How the confidence intervals were computed.
    pub ci_method: String,
    pub summary: Value,
    pub tables: Vec<Table>,
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    /// Every `{mean, ci_low, ci_high}` object in the summary brackets its mean.
    pub fn intervals_bracket(&self) -> bool {
        fn walk(v: &Value) -> bool {
            match v {
                Value::Object(map) => {
                    let ok = match (map.get("mean"), map.get("ci_low"), map.get("ci_high")) {
                        (Some(m), Some(l), Some(h)) => match (m.as_f64(), l.as_f64(), h.as_f64()) {
                            (Some(m), Some(l), Some(h)) => l <= m && m <= h,
                            _ => true,
                        },
                        _ => true,
                    };
                    ok && map.values().all(walk)
                }
                Value::Array(items) => items.iter().all(walk),
                _ => true,
            }
        }
        walk(&self.summary)
    }
}

pub(crate) trait Outcome: Serialize {
    fn tables(&self) -> Vec<Table>;
    fn seeds(&self) -> Vec<u64>;
    fn ci_method(&self) -> &'static str;
}

pub(crate) fn report<C: Serialize, O: Outcome>(
    name: ExperimentName,
    scale: Scale,
    seed: u64,
    config: &C,
    outcome: &O,
    started: Instant,
) -> ExperimentReport {
    ExperimentReport {
        name: name.name().to_string(),
        scale,
        seed,
        config: serde_json::to_value(config).expect("config serializes"),
        seeds: outcome.seeds(),
        ci_method: outcome.ci_method().to_string(),
        summary: serde_json::to_value(outcome).expect("outcome serializes"),
        tables: outcome.tables(),
        runtime_seconds: started.elapsed().as_secs_f64(),
    }
}

/// Runs a study with the defaults of `scale`.
pub fn run_experiment(name: ExperimentName, scale: Scale, seed: u64) -> Result<ExperimentReport> {
    let started = Instant::now();
    Ok(match name {
        ExperimentName::EstimateDist => {
            let c = DistributionConfig::for_scale(scale, seed);
            report(name, scale, seed, &c, &exp_estimate_distribution(&c)?, started)
        }
        ExperimentName::LoglikScan => {
            let c = ScanConfig::for_scale(scale, seed);
            report(name, scale, seed, &c, &exp_loglik_scan(&c)?, started)
        }
        ExperimentName::Influence => {
            let c = InfluenceConfig::for_scale(scale, seed);
            report(name, scale, seed, &c, &exp_influence_direction(&c)?, started)
        }
        ExperimentName::Diagnosis => {
            let c = DiagnosisConfig::for_scale(scale, seed);
            report(name, scale, seed, &c, &exp_diagnosis(&c)?, started)
        }
        ExperimentName::Changepoint => {
            let c = ChangepointExpConfig::for_scale(scale, seed);
            report(name, scale, seed, &c, &exp_changepoint(&c)?, started)
        }
        ExperimentName::Bench => {
            let c = BenchConfig::for_scale(scale, seed);
            report(name, scale, seed, &c, &exp_estimator_bench(&c)?, started)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for n in ExperimentName::ALL {
            assert_eq!(n.name().parse::<ExperimentName>().unwrap(), n);
        }
        assert!("nope".parse::<ExperimentName>().is_err());
        assert_eq!("paper".parse::<Scale>().unwrap(), Scale::Paper);
    }

    #[test]
    fn table_csv() {
        let mut t = Table::new("t", &["a", "b", "c"]);
        t.push(row!["x", 1.5, true]);
        t.push(vec![Value::Null, serde_json::json!(2), serde_json::json!(f64::NAN)]);
        assert_eq!(t.to_csv(), "a,b,c\nx,1.5,true\n,2,\n");
    }

    #[test]
    fn intervals_bracket_mean() {
        let xs = [0.2, 0.4, 0.1, 0.9, 0.5];
        let m = mean_ci(&xs, 1).unwrap();
        assert!(m.ci_low <= m.mean && m.mean <= m.ci_high);
        let r = rmse_ci(&xs, 1).unwrap();
        assert!(r.ci_low <= r.mean && r.mean <= r.ci_high);
        let p = proportion_ci(&[1.0, 1.0, 0.0, 1.0], 1).unwrap();
        assert!(p.ci_low >= 0.0 && p.ci_high <= 1.0 && p.contains(0.75));
        let all = proportion_ci(&[1.0; 10], 1).unwrap();
        assert_eq!((all.ci_low, all.ci_high), (1.0, 1.0));
    }
}
