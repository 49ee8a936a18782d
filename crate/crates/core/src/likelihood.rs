//! Exact log-likelihoods, compensator rescaling and decay scans.
//!
//! Univariate log-likelihood on `[0, H]`:
//!
//! ```text
//! log L = -μH - (α/β) Σ_i (1 - e^{-β(H - t_i)}) + Σ_i log(μ + α A(i))
//! A(1) = 0,  A(i) = e^{-β(t_i - t_{i-1})} (1 + A(i-1))
//! ```
//!
//! `H` is the stream horizon by default, or the last event time with
//! [`HorizonMode::LastEvent`]. A zero intensity at an event yields
//! `f64::NEG_INFINITY` rather than an error so optimizers can reject the region.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::model::{check_streams, EventStream, HawkesParams};
use crate::{rng_from_seed, stats, Error, Result};

/// Where the compensator integral ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonMode {
    /// The time of the last event.
    LastEvent,
    /// The stream's observation horizon `T`.
    #[default]
    StreamT,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoglikOptions {
    pub horizon_mode: HorizonMode,
}

impl LoglikOptions {
    pub fn last_event() -> Self {
        Self {
            horizon_mode: HorizonMode::LastEvent,
        }
    }
}

fn horizon(stream: &EventStream, opts: LoglikOptions) -> Result<f64> {
    match opts.horizon_mode {
        HorizonMode::StreamT => Ok(stream.horizon()),
        HorizonMode::LastEvent => stream.last_time().ok_or(Error::EmptyStream),
    }
}

fn check_univariate(params: &HawkesParams, stream: &EventStream) -> Result<()> {
    if params.dims() != 1 || stream.dims() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "univariate log-likelihood needs M = 1 (params {}, stream {})",
            params.dims(),
            stream.dims()
        )));
    }
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    Ok(())
}

/// Linear-time univariate log-likelihood via the Ozaki recursion.
pub fn loglik_uni(params: &HawkesParams, stream: &EventStream, opts: LoglikOptions) -> Result<f64> {
    check_univariate(params, stream)?;
    let h = horizon(stream, opts)?;
    let (mu, alpha, beta) = (params.mu()[0], params.alpha().get(0, 0), params.beta_pq(0, 0));
    let mut a = 0.0;
    let mut prev: Option<f64> = None;
    let mut log_sum = 0.0;
    let mut comp = 0.0;
    for e in stream.events() {
        if let Some(tp) = prev {
            a = (-beta * (e.t - tp)).exp() * (1.0 + a);
        }
        log_sum += (mu + alpha * a).ln();
        comp += 1.0 - (-beta * (h - e.t)).exp();
        prev = Some(e.t);
    }
    Ok(-mu * h - alpha / beta * comp + log_sum)
}

/// Quadratic-time reference evaluation with `A(i)` summed directly.
pub fn loglik_uni_naive(params: &HawkesParams, stream: &EventStream, opts: LoglikOptions) -> Result<f64> {
    check_univariate(params, stream)?;
    let h = horizon(stream, opts)?;
    let (mu, alpha, beta) = (params.mu()[0], params.alpha().get(0, 0), params.beta_pq(0, 0));
    let times = stream.times();
    let mut total = -mu * h;
    for (i, &ti) in times.iter().enumerate() {
        let a: f64 = times[..i].iter().map(|&tj| (-beta * (ti - tj)).exp()).sum();
        total += (mu + alpha * a).ln();
        total -= alpha / beta * (1.0 - (-beta * (h - ti)).exp());
    }
    Ok(total)
}

/// Multivariate log-likelihood with one Ozaki-style recursion per `(p, q)` pair.
///
/// For `M = 1` the floating-point operations coincide with [`loglik_uni`].
pub fn loglik_multi(params: &HawkesParams, stream: &EventStream, opts: LoglikOptions) -> Result<f64> {
    let m = params.dims();
    if stream.dims() != m {
        return Err(Error::ShapeMismatch(format!(
            "stream has {} dimensions, params have {m}",
            stream.dims()
        )));
    }
    let h = horizon(stream, opts)?;
    // state[p * m + q] = Σ_{t_j^q < t} e^{-β_pq (t - t_j^q)}
    let mut state = vec![0.0; m * m];
    let mut prev: Option<f64> = None;
    let mut log_sum = 0.0;
    // comp[p * m + q] = Σ_{t_j^q} (1 - e^{-β_pq (H - t_j^q)})
    let mut comp = vec![0.0; m * m];
    for e in stream.events() {
        let p = e.dim;
        if let Some(tp) = prev {
            let dt = e.t - tp;
            for r in 0..m {
                for q in 0..m {
                    let s = &mut state[r * m + q];
                    *s *= (-params.beta_pq(r, q) * dt).exp();
                }
            }
        }
        let lambda = params.mu()[p]
            + (0..m)
                .map(|q| params.alpha().get(p, q) * state[p * m + q])
                .sum::<f64>();
        log_sum += lambda.ln();
        for r in 0..m {
            state[r * m + p] += 1.0;
            comp[r * m + p] += 1.0 - (-params.beta_pq(r, p) * (h - e.t)).exp();
        }
        prev = Some(e.t);
    }
    let mut total = 0.0;
    for p in 0..m {
        let excitation: f64 = (0..m)
            .map(|q| params.alpha().get(p, q) / params.beta_pq(p, q) * comp[p * m + q])
            .sum();
        total += -params.mu()[p] * h - excitation;
    }
    Ok(total + log_sum)
}

/// Sum of [`loglik_multi`] over realizations.
pub fn loglik_set(params: &HawkesParams, streams: &[EventStream], opts: LoglikOptions) -> Result<f64> {
    check_streams(streams)?;
    streams.iter().map(|s| loglik_multi(params, s, opts)).sum()
}

/// Compensator increments between consecutive events of each dimension,
/// grouped by dimension. Under the true model they are iid Exp(1).
pub fn rescale_by_dim(params: &HawkesParams, stream: &EventStream) -> Result<Vec<Vec<f64>>> {
    let m = params.dims();
    if stream.dims() != m {
        return Err(Error::ShapeMismatch(format!(
            "stream has {} dimensions, params have {m}",
            stream.dims()
        )));
    }
    let mut state = vec![0.0; m * m];
    let mut counts = vec![0.0; m];
    let mut last_lambda = vec![0.0; m];
    let mut gaps = vec![Vec::new(); m];
    let mut prev = 0.0;
    for e in stream.events() {
        let dt = e.t - prev;
        for r in 0..m {
            for q in 0..m {
                state[r * m + q] *= (-params.beta_pq(r, q) * dt).exp();
            }
        }
        let p = e.dim;
        let compensator = params.mu()[p] * e.t
            + (0..m)
                .map(|q| params.alpha().get(p, q) / params.beta_pq(p, q) * (counts[q] - state[p * m + q]))
                .sum::<f64>();
        gaps[p].push(compensator - last_lambda[p]);
        last_lambda[p] = compensator;
        for r in 0..m {
            state[r * m + p] += 1.0;
        }
        counts[p] += 1.0;
        prev = e.t;
    }
    Ok(gaps)
}

/// [`rescale_by_dim`] flattened in dimension order.
pub fn rescale(params: &HawkesParams, stream: &EventStream) -> Result<Vec<f64>> {
    Ok(rescale_by_dim(params, stream)?.into_iter().flatten().collect())
}

/// Negative log-likelihood curve over a decay grid with bootstrap bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub beta_grid: Vec<f64>,
    pub mean_negloglik: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
}

impl ScanResult {
    /// `beta,mean_negloglik,ci_low,ci_high`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("beta,mean_negloglik,ci_low,ci_high\n");
        for i in 0..self.beta_grid.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.beta_grid[i], self.mean_negloglik[i], self.ci_low[i], self.ci_high[i]
            ));
        }
        out
    }

    pub fn argmin(&self) -> usize {
        argmin(&self.mean_negloglik)
    }
}

pub(crate) fn argmin(xs: &[f64]) -> usize {
    xs.iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) })
        .0
}

/// Bootstrap resamples used for scan confidence bands.
pub const SCAN_RESAMPLES: usize = 1000;

/// Per-realization negative log-likelihood, `table[k][j]` for stream `k` at
/// `beta_grid[j]`, with baseline and excitation held at `params`.
pub fn negloglik_table(params: &HawkesParams, streams: &[EventStream], beta_grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_streams(streams)?;
    let grid_params = beta_grid
        .iter()
        .map(|&b| params.with_shared_beta(b))
        .collect::<Result<Vec<_>>>()?;
    streams
        .iter()
        .map(|s| {
            grid_params
                .iter()
                .map(|gp| loglik_multi(gp, s, LoglikOptions::default()).map(|v| -v))
                .collect()
        })
        .collect()
}

/// Mean negative log-likelihood across realizations at each grid decay, with
/// percentile-bootstrap 95% bands from resampling realizations.
pub fn loglik_scan(params: &HawkesParams, streams: &[EventStream], beta_grid: &[f64], seed: u64) -> Result<ScanResult> {
    if beta_grid.is_empty() {
        return Err(Error::InvalidConfig("decay grid is empty".into()));
    }
    let table = negloglik_table(params, streams, beta_grid)?;
    let k = table.len();
    let g = beta_grid.len();
    let mean: Vec<f64> = (0..g).map(|j| table.iter().map(|r| r[j]).sum::<f64>() / k as f64).collect();

    let mut rng = rng_from_seed(seed);
    let mut boot = vec![Vec::with_capacity(SCAN_RESAMPLES); g];
    let mut sums = vec![0.0; g];
    for _ in 0..SCAN_RESAMPLES {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for _ in 0..k {
            let row = &table[rng.random_range(0..k)];
            sums.iter_mut().zip(row).for_each(|(s, v)| *s += v);
        }
        for j in 0..g {
            boot[j].push(sums[j] / k as f64);
        }
    }
    let mut ci_low = Vec::with_capacity(g);
    let mut ci_high = Vec::with_capacity(g);
    for j in 0..g {
        let sorted = stats::sorted(&boot[j]);
        // Percentile bounds can miss the point estimate for skewed samples.
        ci_low.push(stats::quantile_sorted(&sorted, 0.025).min(mean[j]));
        ci_high.push(stats::quantile_sorted(&sorted, 0.975).max(mean[j]));
    }
    Ok(ScanResult {
        beta_grid: beta_grid.to_vec(),
        mean_negloglik: mean,
        ci_low,
        ci_high,
    })
}

/// `count` points `10^x` with `x` evenly spaced on `[log10_lo, log10_hi]`.
pub fn log_grid(count: usize, log10_lo: f64, log10_hi: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![10f64.powf(log10_lo)],
        _ => (0..count)
            .map(|i| 10f64.powf(log10_lo + (log10_hi - log10_lo) * i as f64 / (count - 1) as f64))
            .collect(),
    }
}

/// `count` evenly spaced points on `[lo, hi]`.
pub fn linear_grid(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}
