//! Conjugate inference over a sequence of decay estimates.
//!
//! The estimates `β̂_k` are modelled as Exponential with rate `λ`, and `λ`
//! has a Gamma prior with shape `a0` and rate `b0`. The posterior is
//! Gamma(`a0 + K`, `b0 + Σβ̂`), and a new estimate is Lomax distributed.
//!
//! Two predictive conventions are offered. [`PredictiveKind::Paper`] uses
//! shape `a0` and scale `b0 + Σβ̂`, giving the mean `(b0 + Σβ̂)/(a0 - 1)`;
//! with the customary `a0 = K` this is close to the sample mean pulled
//! towards `b0`. [`PredictiveKind::Conjugate`] is the textbook posterior
//! predictive with shape `a0 + K`.

mod bootstrap;
mod lomax;

use serde::{Deserialize, Serialize};

pub use bootstrap::{bayesian_bootstrap, empirical_bootstrap, weighted_mean, Interval};
pub use lomax::Lomax;

use crate::estimators::DecayEstimates;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaExpModel {
    pub a0: f64,
    pub b0: f64,
}

impl GammaExpModel {
    pub fn new(a0: f64, b0: f64) -> Result<Self> {
        for (name, v) in [("a0", a0), ("b0", b0)] {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{name} = {v}")));
            }
            if v <= 0.0 {
                return Err(Error::NegativeRate(format!("{name} = {v}")));
            }
        }
        Ok(Self { a0, b0 })
    }

    /// `a0 = K`, the default shape.
    pub fn with_default_shape(b0: f64, estimates: &DecayEstimates) -> Result<Self> {
        Self::new(estimates.len() as f64, b0)
    }
}

/// Gamma distribution over the Exponential rate, shape `a`, rate `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPosterior {
    pub a: f64,
    pub b: f64,
}

impl GammaPosterior {
    pub fn mean(&self) -> f64 {
        self.a / self.b
    }

    pub fn variance(&self) -> f64 {
        self.a / (self.b * self.b)
    }

    /// Conjugate update with one more estimate.
    pub fn update(self, estimate: f64) -> Self {
        Self {
            a: self.a + 1.0,
            b: self.b + estimate,
        }
    }
}

/// `a = a0 + K`, `b = b0 + Σβ̂`.
pub fn posterior(model: &GammaExpModel, estimates: &DecayEstimates) -> Result<GammaPosterior> {
    estimates.check()?;
    let prior = GammaPosterior { a: model.a0, b: model.b0 };
    Ok(estimates.values.iter().fold(prior, |post, &v| post.update(v)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictiveKind {
    #[default]
    Paper,
    Conjugate,
}

impl std::str::FromStr for PredictiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "conjugate" => Ok(Self::Conjugate),
            _ => Err(Error::InvalidConfig(format!("unknown predictive {s:?}"))),
        }
    }
}

pub fn predictive(model: &GammaExpModel, estimates: &DecayEstimates, kind: PredictiveKind) -> Result<Lomax> {
    let post = posterior(model, estimates)?;
    let shape = match kind {
        PredictiveKind::Paper => model.a0,
        PredictiveKind::Conjugate => post.a,
    };
    Ok(Lomax { shape, scale: post.b })
}

fn mean_of(d: Lomax) -> Result<f64> {
    d.mean().ok_or(Error::ShapeTooSmall { shape: d.shape })
}

/// `(b0 + Σβ̂)/(a0 - 1)`.
pub fn predictive_mean_paper(model: &GammaExpModel, estimates: &DecayEstimates) -> Result<f64> {
    mean_of(predictive(model, estimates, PredictiveKind::Paper)?)
}

/// `(b0 + Σβ̂)/(a0 + K - 1)`.
pub fn predictive_mean_conjugate(model: &GammaExpModel, estimates: &DecayEstimates) -> Result<f64> {
    mean_of(predictive(model, estimates, PredictiveKind::Conjugate)?)
}

/// Central credible interval of the predictive at `level`.
pub fn predictive_interval(
    model: &GammaExpModel,
    estimates: &DecayEstimates,
    level: f64,
    kind: PredictiveKind,
) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(format!("level must lie in (0, 1), got {level}")));
    }
    let d = predictive(model, estimates, kind)?;
    let a = 1.0 - level;
    Ok((d.quantile(a / 2.0), d.quantile(1.0 - a / 2.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveSummary {
    pub predictive: PredictiveKind,
    pub a0: f64,
    pub b0: f64,
    pub k: usize,
    pub sum_estimates: f64,
    /// Predictive mean under the selected convention.
    pub beta_prime: f64,
    pub level: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub median: f64,
    /// `b0 - β′`.
    pub shift: f64,
    pub mean_paper: Option<f64>,
    pub mean_conjugate: Option<f64>,
    pub posterior: GammaPosterior,
}

pub fn summarize(model: &GammaExpModel, estimates: &DecayEstimates, level: f64, kind: PredictiveKind) -> Result<PredictiveSummary> {
    let d = predictive(model, estimates, kind)?;
    let beta_prime = mean_of(d)?;
    let (ci_low, ci_high) = predictive_interval(model, estimates, level, kind)?;
    Ok(PredictiveSummary {
        predictive: kind,
        a0: model.a0,
        b0: model.b0,
        k: estimates.len(),
        sum_estimates: estimates.sum(),
        beta_prime,
        level,
        ci_low,
        ci_high,
        median: d.median(),
        shift: model.b0 - beta_prime,
        mean_paper: predictive_mean_paper(model, estimates).ok(),
        mean_conjugate: predictive_mean_conjugate(model, estimates).ok(),
        posterior: posterior(model, estimates)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The hypothesis `b0` lies above the predictive mean.
    OverEstimate,
    UnderEstimate,
    Consistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub shift: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub verdict: Verdict,
}

/// `b0 - β′` with an empirical bootstrap interval over the estimates. The
/// verdict is "consistent" when the interval contains zero.
pub fn diagnose(
    model: &GammaExpModel,
    estimates: &DecayEstimates,
    kind: PredictiveKind,
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<Diagnosis> {
    estimates.check()?;
    let shift_of = |xs: &[f64]| -> f64 {
        let shape = match kind {
            PredictiveKind::Paper => model.a0,
            PredictiveKind::Conjugate => model.a0 + xs.len() as f64,
        };
        model.b0 - (model.b0 + xs.iter().sum::<f64>()) / (shape - 1.0)
    };
    let shift = model.b0 - mean_of(predictive(model, estimates, kind)?)?;
    let ci = if estimates.is_empty() {
        Interval {
            estimate: shift,
            low: shift,
            high: shift,
        }
    } else {
        empirical_bootstrap(&estimates.values, shift_of, level, resamples, seed)?
    };
    let verdict = if ci.low > 0.0 {
        Verdict::OverEstimate
    } else if ci.high < 0.0 {
        Verdict::UnderEstimate
    } else {
        Verdict::Consistent
    };
    Ok(Diagnosis {
        shift,
        ci_low: ci.low.min(shift),
        ci_high: ci.high.max(shift),
        level,
        verdict,
    })
}
