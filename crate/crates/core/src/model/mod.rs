//! Parameter and event-stream types, stationarity and intensity evaluation.
//!
//! The conditional intensity of dimension `p` is
//!
//! ```text
//! λ_p(t) = μ_p + Σ_q Σ_{t_j^q < t} α_pq · exp(-β_pq (t - t_j^q))
//! ```
//!
//! History is taken strictly before `t`: the jump caused by an event is felt
//! from the instant after it.

mod events;
mod matrix;
mod params;

pub use events::{check_streams, Event, EventStream, RealizationSet};
pub use matrix::Matrix;
pub use params::{validate, BetaDoc, Decay, HawkesParams, ParamsDoc};

use crate::{Error, Result};

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 10_000;

/// Largest-magnitude eigenvalue of the branching matrix `α_pq / β_pq`.
///
/// Closed form for `M <= 2`; shifted power iteration otherwise (the shift by
/// the identity makes the Perron root strictly dominant for any nonnegative
/// matrix, including periodic ones).
pub fn spectral_radius(params: &HawkesParams) -> f64 {
    let m = params.dims();
    let branching = |p: usize, q: usize| params.alpha().get(p, q) / params.beta_pq(p, q);
    match m {
        1 => branching(0, 0),
        2 => {
            let (a, b, c, d) = (branching(0, 0), branching(0, 1), branching(1, 0), branching(1, 1));
            let half_trace = 0.5 * (a + d);
            let disc = 0.25 * (a - d) * (a - d) + b * c;
            if disc >= 0.0 {
                let r = disc.sqrt();
                (half_trace + r).abs().max((half_trace - r).abs())
            } else {
                (half_trace * half_trace - disc).sqrt()
            }
        }
        _ => {
            let mut x = vec![1.0 / m as f64; m];
            let mut next = vec![0.0; m];
            let mut estimate = 0.0;
            for _ in 0..POWER_MAX_ITERS {
                for p in 0..m {
                    next[p] = x[p] + (0..m).map(|q| branching(p, q) * x[q]).sum::<f64>();
                }
                let norm: f64 = next.iter().sum();
                let updated = norm - 1.0;
                for (xi, ni) in x.iter_mut().zip(&next) {
                    *xi = ni / norm;
                }
                if (updated - estimate).abs() <= POWER_TOL * updated.abs().max(1.0) {
                    estimate = updated;
                    break;
                }
                estimate = updated;
            }
            estimate.max(0.0)
        }
    }
}

pub fn is_stationary(params: &HawkesParams) -> bool {
    spectral_radius(params) < 1.0
}

/// Errors with [`Error::NonStationary`] when the spectral radius is at least 1.
pub fn ensure_stationary(params: &HawkesParams) -> Result<()> {
    let rho = spectral_radius(params);
    if rho < 1.0 {
        Ok(())
    } else {
        Err(Error::NonStationary { rho })
    }
}

/// Conditional intensity of dimension `p` at time `t`, using events strictly
/// before `t`.
pub fn intensity_at(params: &HawkesParams, stream: &EventStream, p: usize, t: f64) -> Result<f64> {
    if p >= params.dims() {
        return Err(Error::DimOutOfRange { dim: p, dims: params.dims() });
    }
    if stream.dims() != params.dims() {
        return Err(Error::ShapeMismatch(format!(
            "stream has {} dimensions, params have {}",
            stream.dims(),
            params.dims()
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::NonFinite(format!("evaluation time {t}")));
    }
    let excitation: f64 = stream
        .events()
        .iter()
        .take_while(|e| e.t < t)
        .map(|e| params.alpha().get(p, e.dim) * (-params.beta_pq(p, e.dim) * (t - e.t)).exp())
        .sum();
    Ok(params.mu()[p] + excitation)
}

/// Which of two dimensions excites the other more strongly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InfluenceDirection {
    /// `α_pq > α_qp`: q drives p harder than the reverse.
    QToP,
    /// `α_qp > α_pq`.
    PToQ,
    Tie,
}

pub fn influence_direction(alpha: &Matrix, p: usize, q: usize) -> Result<InfluenceDirection> {
    let m = alpha.dim();
    if p >= m || q >= m {
        return Err(Error::DimOutOfRange { dim: p.max(q), dims: m });
    }
    if p == q {
        return Err(Error::InvalidConfig("influence direction needs two distinct dimensions".into()));
    }
    let (pq, qp) = (alpha.get(p, q), alpha.get(q, p));
    Ok(if pq > qp {
        InfluenceDirection::QToP
    } else if qp > pq {
        InfluenceDirection::PToQ
    } else {
        InfluenceDirection::Tie
    })
}

/// Dimension `q` Granger-causes `p` iff `α_pq > 0`.
pub fn granger_causes(alpha: &Matrix, q: usize, p: usize) -> bool {
    alpha.get(p, q) > 0.0
}
