//! Exhaustive profile-likelihood search over a log-spaced grid.

use rayon::prelude::*;

use super::convex::{fit_pooled, MuAlphaFit};
use super::pooled::Pooled;
use super::{on_bound, DecayFit, FitConfig, FitMethod};
use crate::{Error, EventStream, Result};

/// Grid points outside the bounds are dropped. Ties go to the smaller decay.
pub fn fit_decay_grid(streams: &[EventStream], config: &FitConfig) -> Result<DecayFit> {
    config.validate()?;
    let pooled = Pooled::new(streams)?;
    let grid: Vec<f64> = config
        .grid
        .values()
        .into_iter()
        .filter(|b| (config.bounds[0]..=config.bounds[1]).contains(b))
        .collect();
    if grid.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no grid point lies within the bounds [{}, {}]",
            config.bounds[0], config.bounds[1]
        )));
    }
    let fits: Vec<MuAlphaFit> = grid.par_iter().map(|&b| fit_pooled(&pooled, b)).collect();
    let mut best = 0;
    for (i, f) in fits.iter().enumerate() {
        if f.loglik > fits[best].loglik {
            best = i;
        }
    }
    let fit = &fits[best];
    Ok(DecayFit {
        method: FitMethod::Grid,
        beta: grid[best],
        mu: fit.mu.clone(),
        alpha: fit.alpha.clone(),
        loglik: fit.loglik,
        converged: fit.converged,
        at_bound: on_bound(grid[best], config.bounds),
        evaluations: grid.len(),
    })
}
