//! Single-changepoint model over a sequence of decay estimates.
//!
//! ```text
//! b1 ~ Exponential(rate1),  b2 ~ Exponential(rate2),  κ ~ U{1..K}
//! β̂_k ~ Exponential(mean b1)  for k < κ
//! β̂_k ~ Exponential(mean b2)  for k >= κ
//! ```
//!
//! Sampling is Metropolis-within-Gibbs: `b1` and `b2` take log-scale random
//! walk steps whose widths adapt during burn-in, and `κ` is drawn exactly
//! from its categorical full conditional.

mod exact;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use exact::{exact_small_posterior, ExactPosterior, EXACT_MAX_K};

use crate::estimators::DecayEstimates;
use crate::{rng_from_seed, Error, Result, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangepointModel {
    pub rate1: f64,
    pub rate2: f64,
}

impl ChangepointModel {
    pub fn new(rate1: f64, rate2: f64) -> Result<Self> {
        for (name, v) in [("rate1", rate1), ("rate2", rate2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NegativeRate(format!("{name} = {v}")));
            }
        }
        Ok(Self { rate1, rate2 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    /// Iterations including burn-in.
    pub n_samples: usize,
    /// Defaults to a fifth of `n_samples`.
    pub burn_in: Option<usize>,
    pub thin: usize,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            n_samples: 20_000,
            burn_in: None,
            thin: 1,
            seed: 0,
        }
    }
}

impl McmcConfig {
    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.n_samples / 5)
    }

    fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        if self.n_samples <= self.burn_in() {
            return Err(Error::InvalidConfig(format!(
                "n_samples ({}) must exceed burn_in ({})",
                self.n_samples,
                self.burn_in()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub iter: usize,
    pub b1: f64,
    pub b2: f64,
    pub kappa: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointPosterior {
    pub k: usize,
    pub draws: Vec<Draw>,
    /// Post-burn-in acceptance rates of the `b1` and `b2` steps.
    pub acceptance_b1: f64,
    pub acceptance_b2: f64,
    /// Final random-walk widths on the log scale.
    pub step_b1: f64,
    pub step_b2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointSummary {
    pub k: usize,
    pub samples: usize,
    pub beta1_mean: f64,
    pub beta2_mean: f64,
    pub kappa_median: usize,
    /// `κ̂ / K`.
    pub kappa_fraction: f64,
    /// `β̄1 < β̄2`.
    pub increasing: bool,
    pub acceptance_b1: f64,
    pub acceptance_b2: f64,
}

impl ChangepointPosterior {
    /// Posterior probability of each `κ = 1..K` (index `κ - 1`).
    pub fn kappa_pmf(&self) -> Vec<f64> {
        let mut pmf = vec![0.0; self.k.max(1)];
        for d in &self.draws {
            pmf[d.kappa - 1] += 1.0;
        }
        let n = self.draws.len() as f64;
        pmf.iter_mut().for_each(|p| *p /= n);
        pmf
    }

    pub fn summarize(&self) -> ChangepointSummary {
        summarize(self)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,b1,b2,kappa\n");
        for d in &self.draws {
            out.push_str(&format!("{},{},{},{}\n", d.iter, d.b1, d.b2, d.kappa));
        }
        out
    }
}

pub fn summarize(post: &ChangepointPosterior) -> ChangepointSummary {
    let n = post.draws.len() as f64;
    let beta1_mean = post.draws.iter().map(|d| d.b1).sum::<f64>() / n;
    let beta2_mean = post.draws.iter().map(|d| d.b2).sum::<f64>() / n;
    let mut kappas: Vec<usize> = post.draws.iter().map(|d| d.kappa).collect();
    kappas.sort_unstable();
    let kappa_median = kappas[(kappas.len() - 1) / 2];
    ChangepointSummary {
        k: post.k,
        samples: post.draws.len(),
        beta1_mean,
        beta2_mean,
        kappa_median,
        kappa_fraction: kappa_median as f64 / post.k as f64,
        increasing: beta1_mean < beta2_mean,
        acceptance_b1: post.acceptance_b1,
        acceptance_b2: post.acceptance_b2,
    }
}

/// Shannon entropy (nats) of a pmf.
pub fn entropy(pmf: &[f64]) -> f64 {
    pmf.iter().filter(|&&p| p > 0.0).map(|p| -p * p.ln()).sum()
}

/// Total-variation distance between two pmfs of equal length.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Runs one chain. Requires at least two estimates, all positive.
pub fn mcmc(estimates: &DecayEstimates, model: &ChangepointModel, config: &McmcConfig) -> Result<ChangepointPosterior> {
    estimates.check()?;
    if estimates.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "the changepoint model needs at least 2 estimates, got {}",
            estimates.len()
        )));
    }
    run_chain(&estimates.values, model, config)
}

/// Independent chains with seeds `seed + c`.
pub fn mcmc_chains(
    estimates: &DecayEstimates,
    model: &ChangepointModel,
    config: &McmcConfig,
    chains: usize,
) -> Result<Vec<ChangepointPosterior>> {
    if chains == 0 {
        return Err(Error::InvalidConfig("chains must be at least 1".into()));
    }
    (0..chains)
        .into_par_iter()
        .map(|c| {
            let cfg = McmcConfig {
                seed: config.seed.wrapping_add(c as u64),
                ..*config
            };
            mcmc(estimates, model, &cfg)
        })
        .collect()
}

/// Potential scale reduction of a scalar across chains (values per chain).
pub fn r_hat(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len() as f64;
    let n = chains.iter().map(Vec::len).min().unwrap_or(0) as f64;
    if m < 2.0 || n < 2.0 {
        return f64::NAN;
    }
    let means: Vec<f64> = chains.iter().map(|c| crate::stats::mean(c)).collect();
    let w = chains.iter().map(|c| crate::stats::variance(c)).sum::<f64>() / m;
    let b = n * crate::stats::variance(&means);
    let var = (n - 1.0) / n * w + b / n;
    (var / w).sqrt()
}

struct Segmented<'a> {
    prefix: Vec<f64>,
    values: &'a [f64],
}

impl<'a> Segmented<'a> {
    fn new(values: &'a [f64]) -> Self {
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(0.0);
        for v in values {
            prefix.push(prefix.last().unwrap() + v);
        }
        Self { prefix, values }
    }

    fn k(&self) -> usize {
        self.values.len()
    }

    /// (count, sum) before and from `κ`.
    fn split(&self, kappa: usize) -> ((f64, f64), (f64, f64)) {
        let j = kappa.saturating_sub(1).min(self.k());
        let total = self.prefix[self.k()];
        ((j as f64, self.prefix[j]), ((self.k() - j) as f64, total - self.prefix[j]))
    }
}

/// Log posterior of a mean `b` with Exponential(rate) prior, up to a constant.
fn log_target(b: f64, rate: f64, n: f64, s: f64) -> f64 {
    -rate * b - n * b.ln() - s / b
}

const ADAPT_WINDOW: usize = 50;
const DEGENERATE: f64 = 0.01;

struct Walker {
    step: f64,
    accepted: usize,
    tried: usize,
}

impl Walker {
    fn propose(&mut self, rng: &mut Rng, b: f64, rate: f64, n: f64, s: f64) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        let candidate = b * (self.step * z).exp();
        // Random walk on ln b: the Jacobian adds ln b' - ln b.
        let log_ratio = log_target(candidate, rate, n, s) - log_target(b, rate, n, s) + (candidate / b).ln();
        self.tried += 1;
        if rng.random::<f64>().ln() < log_ratio {
            self.accepted += 1;
            candidate
        } else {
            b
        }
    }

    fn adapt(&mut self) {
        let rate = self.accepted as f64 / self.tried.max(1) as f64;
        if rate < 0.30 {
            self.step *= 0.8;
        } else if rate > 0.45 {
            self.step *= 1.25;
        }
        self.reset();
    }

    fn reset(&mut self) {
        self.accepted = 0;
        self.tried = 0;
    }

    fn rate(&self) -> f64 {
        self.accepted as f64 / self.tried.max(1) as f64
    }
}

/// The sampler itself; `values` may be empty, in which case `κ` stays at 1
/// and `b1`, `b2` follow their priors.
pub(crate) fn run_chain(values: &[f64], model: &ChangepointModel, config: &McmcConfig) -> Result<ChangepointPosterior> {
    config.validate()?;
    let seg = Segmented::new(values);
    let k = seg.k();
    let mut rng = rng_from_seed(config.seed);
    let burn_in = config.burn_in();

    let mean = if k > 0 { seg.prefix[k] / k as f64 } else { 1.0 };
    let (mut b1, mut b2) = (mean, mean);
    let mut kappa = if k > 0 { rng.random_range(1..=k) } else { 1 };
    let mut w1 = Walker {
        step: 1.0,
        accepted: 0,
        tried: 0,
    };
    let mut w2 = Walker {
        step: 1.0,
        accepted: 0,
        tried: 0,
    };
    let mut logw = vec![0.0; k];
    let mut draws = Vec::with_capacity((config.n_samples - burn_in) / config.thin + 1);

    for iter in 0..config.n_samples {
        let ((n1, s1), (n2, s2)) = seg.split(kappa);
        b1 = w1.propose(&mut rng, b1, model.rate1, n1, s1);
        b2 = w2.propose(&mut rng, b2, model.rate2, n2, s2);

        if k > 0 {
            let (l1, l2) = (b1.ln(), b2.ln());
            let total = seg.prefix[k];
            let mut max = f64::NEG_INFINITY;
            for c in 1..=k {
                let j = c - 1;
                let before = seg.prefix[j];
                let lw = -(j as f64) * l1 - before / b1 - ((k - j) as f64) * l2 - (total - before) / b2;
                logw[j] = lw;
                max = max.max(lw);
            }
            let mut norm = 0.0;
            for lw in logw.iter_mut() {
                *lw = (*lw - max).exp();
                norm += *lw;
            }
            let mut u = rng.random::<f64>() * norm;
            kappa = k;
            for (j, w) in logw.iter().enumerate() {
                if u < *w {
                    kappa = j + 1;
                    break;
                }
                u -= w;
            }
        }

        if iter < burn_in {
            if (iter + 1) % ADAPT_WINDOW == 0 {
                w1.adapt();
                w2.adapt();
            }
            if iter + 1 == burn_in {
                w1.reset();
                w2.reset();
            }
        } else if (iter - burn_in) % config.thin == 0 {
            draws.push(Draw { iter, b1, b2, kappa });
        }
    }

    for (block, w) in [("b1", &w1), ("b2", &w2)] {
        if w.rate() < DEGENERATE {
            return Err(Error::DegenerateChain { block, rate: w.rate() });
        }
    }
    Ok(ChangepointPosterior {
        k,
        draws,
        acceptance_b1: w1.rate(),
        acceptance_b2: w2.rate(),
        step_b1: w1.step,
        step_b2: w2.step,
    })
}
