//! Joint bounded quasi-Newton fit of `(μ, α, β)`.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::lbfgsb::{self, Options};
use super::pooled::{split_params, Pooled};
use super::{on_bound, DecayFit, FitConfig, FitMethod};
use crate::{rng_from_seed, Error, Result};

/// Lower bound on every baseline, keeping the log-likelihood finite.
pub const MU_FLOOR: f64 = 1e-10;
const PERTURBED_STARTS: usize = 3;
const FD_STEP: f64 = 1e-6;

/// Maximizes the pooled log-likelihood over all parameters within the decay
/// bounds, from the configured start plus three log-normally perturbed ones.
pub fn fit_decay_nonlinear(streams: &[crate::EventStream], config: &FitConfig) -> Result<DecayFit> {
    config.validate()?;
    let pooled = Pooled::new(streams)?;
    pooled.require_pairs()?;
    let mut rng = rng_from_seed(config.seed);
    let b0 = config.start();
    let mut starts = vec![b0];
    for _ in 0..PERTURBED_STARTS {
        let z: f64 = StandardNormal.sample(&mut rng);
        starts.push((b0 * z.exp()).clamp(config.bounds[0], config.bounds[1]));
    }
    let runs: Vec<_> = starts.par_iter().map(|&b| run(&pooled, config.bounds, b)).collect();
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let mut best: Option<&lbfgsb::Minimum> = None;
    for r in &runs {
        if r.f.is_finite() && best.is_none_or(|b| r.f < b.f) {
            best = Some(r);
        }
    }
    let best = best.ok_or_else(|| Error::NonConvergence("no start reached a finite log-likelihood".into()))?;
    let m = pooled.dims;
    let (mu, alpha) = split_params(m, &best.x);
    let beta = best.x[m + m * m];
    Ok(DecayFit {
        method: FitMethod::Nonlinear,
        beta,
        loglik: pooled.loglik(&mu, alpha.as_slice(), beta, None),
        mu,
        alpha,
        converged: best.converged,
        at_bound: on_bound(beta, config.bounds),
        evaluations,
    })
}

fn run(pooled: &Pooled, bounds: [f64; 2], beta0: f64) -> lbfgsb::Minimum {
    let m = pooled.dims;
    let n = pooled.len() as f64;
    let dim = m + m * m + 1;
    let mut x0 = Vec::with_capacity(dim);
    for p in 0..m {
        x0.push((0.5 * pooled.counts[p] as f64 / pooled.total_horizon).max(MU_FLOOR));
    }
    x0.extend(std::iter::repeat_n(0.5 * beta0 / m as f64, m * m));
    x0.push(beta0);
    let mut lo = vec![MU_FLOOR; m];
    lo.extend(std::iter::repeat_n(0.0, m * m));
    lo.push(bounds[0]);
    let mut hi = vec![f64::INFINITY; m + m * m];
    hi.push(bounds[1]);

    let objective = |x: &[f64], g: &mut [f64]| -> f64 {
        let (mu, alpha) = (&x[..m], &x[m..m + m * m]);
        let beta = x[dim - 1];
        let ll = pooled.loglik(mu, alpha, beta, Some(&mut g[..dim - 1]));
        let h = FD_STEP * beta;
        let (up, down) = ((beta + h).min(bounds[1]), (beta - h).max(bounds[0]));
        let f_up = if up > beta { pooled.loglik(mu, alpha, up, None) } else { ll };
        let f_down = if down < beta { pooled.loglik(mu, alpha, down, None) } else { ll };
        g[dim - 1] = -(f_up - f_down) / (up - down) / n;
        g[..dim - 1].iter_mut().for_each(|v| *v = -*v / n);
        -ll / n
    };
    lbfgsb::minimize(objective, &x0, &lo, &hi, Options::default())
}
