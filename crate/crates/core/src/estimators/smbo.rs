//! Sequential model-based search in the style of a tree-structured Parzen
//! estimator, over `ln β`.
//!
//! The first evaluation is the configured start, followed by up to nine
//! points of a randomly shifted van der Corput sequence. Afterwards the
//! evaluated points are split into the best quarter and the rest, a Parzen
//! density is fitted to each, and the next point is the one among 24 draws
//! from the "good" density that maximizes the good/bad density ratio.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use super::convex::{fit_pooled, MuAlphaFit};
use super::pooled::Pooled;
use super::{on_bound, DecayFit, FitConfig, FitMethod};
use crate::{rng_from_seed, EventStream, Result, Rng};

const INITIAL_POINTS: usize = 10;
const GAMMA: f64 = 0.25;
const CANDIDATES: usize = 24;

pub fn fit_decay_smbo(streams: &[EventStream], config: &FitConfig) -> Result<DecayFit> {
    config.validate()?;
    let pooled = Pooled::new(streams)?;
    let (a, b) = (config.bounds[0].ln(), config.bounds[1].ln());
    let mut rng = rng_from_seed(config.seed);
    let shift: f64 = rng.random();

    let mut points: Vec<f64> = Vec::with_capacity(config.budget);
    let mut losses: Vec<f64> = Vec::with_capacity(config.budget);
    let mut fits: Vec<MuAlphaFit> = Vec::with_capacity(config.budget);
    let mut evaluate = |u: f64, points: &mut Vec<f64>, losses: &mut Vec<f64>| {
        let fit = fit_pooled(&pooled, u.exp().clamp(config.bounds[0], config.bounds[1]));
        points.push(u);
        losses.push(if fit.loglik.is_finite() { -fit.loglik } else { f64::INFINITY });
        fits.push(fit);
    };

    evaluate(config.start().ln(), &mut points, &mut losses);
    for k in 1..INITIAL_POINTS.min(config.budget) {
        let v = (van_der_corput(k as u64) + shift).fract();
        evaluate(a + (b - a) * v, &mut points, &mut losses);
    }
    while points.len() < config.budget {
        let u = propose(&points, &losses, a, b, &mut rng);
        evaluate(u, &mut points, &mut losses);
    }

    let mut best = 0;
    for i in 1..losses.len() {
        if losses[i] < losses[best] {
            best = i;
        }
    }
    let beta = points[best].exp().clamp(config.bounds[0], config.bounds[1]);
    let fit = &fits[best];
    Ok(DecayFit {
        method: FitMethod::Smbo,
        beta,
        mu: fit.mu.clone(),
        alpha: fit.alpha.clone(),
        loglik: fit.loglik,
        converged: fit.converged,
        at_bound: on_bound(beta, config.bounds),
        evaluations: points.len(),
    })
}

fn van_der_corput(mut k: u64) -> f64 {
    let (mut v, mut denom) = (0.0, 1.0);
    while k > 0 {
        denom *= 2.0;
        v += (k & 1) as f64 / denom;
        k >>= 1;
    }
    v
}

/// Adaptive Parzen estimator: one Gaussian per observation with a width set
/// by its neighbours, plus a uniform prior component over `[a, b]`.
struct Parzen {
    centers: Vec<f64>,
    widths: Vec<f64>,
    a: f64,
    b: f64,
}

impl Parzen {
    fn new(mut xs: Vec<f64>, a: f64, b: f64) -> Self {
        xs.sort_by(f64::total_cmp);
        let span = b - a;
        let min_width = span / (1.0 + xs.len() as f64).min(100.0);
        let widths = (0..xs.len())
            .map(|i| {
                let left = if i == 0 { xs[i] - a } else { xs[i] - xs[i - 1] };
                let right = if i + 1 == xs.len() { b - xs[i] } else { xs[i + 1] - xs[i] };
                left.max(right).clamp(min_width, span)
            })
            .collect();
        Self {
            centers: xs,
            widths,
            a,
            b,
        }
    }

    fn ln_density(&self, u: f64) -> f64 {
        let k = (self.centers.len() + 1) as f64;
        let mut total = 1.0 / (self.b - self.a);
        for (c, w) in self.centers.iter().zip(&self.widths) {
            let z = (u - c) / w;
            total += (-0.5 * z * z).exp() / (w * (2.0 * std::f64::consts::PI).sqrt());
        }
        (total / k).ln()
    }

    fn sample(&self, rng: &mut Rng) -> f64 {
        let pick = rng.random_range(0..=self.centers.len());
        if pick == self.centers.len() {
            return rng.random_range(self.a..=self.b);
        }
        let normal = Normal::new(self.centers[pick], self.widths[pick]).expect("positive width");
        for _ in 0..100 {
            let u = normal.sample(rng);
            if (self.a..=self.b).contains(&u) {
                return u;
            }
        }
        self.centers[pick]
    }
}

fn propose(points: &[f64], losses: &[f64], a: f64, b: f64, rng: &mut Rng) -> f64 {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| losses[i].total_cmp(&losses[j]));
    let n_good = ((GAMMA * points.len() as f64).ceil() as usize).max(1);
    let good = Parzen::new(order[..n_good].iter().map(|&i| points[i]).collect(), a, b);
    let bad = Parzen::new(order[n_good..].iter().map(|&i| points[i]).collect(), a, b);
    let mut best = (f64::NEG_INFINITY, a);
    for _ in 0..CANDIDATES {
        let u = good.sample(rng);
        let score = good.ln_density(u) - bad.ln_density(u);
        if score > best.0 {
            best = (score, u);
        }
    }
    best.1
}
