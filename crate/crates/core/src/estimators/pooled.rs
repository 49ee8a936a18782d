//! Flattened view of several realizations for repeated shared-decay evaluation.

use crate::model::{check_streams, EventStream, Matrix};
use crate::{Error, Result};

pub(crate) struct Segment {
    pub start: usize,
    pub end: usize,
    pub horizon: f64,
}

/// Realizations packed into flat arrays. Realizations never interact: the
/// excitation state resets at every segment boundary.
pub(crate) struct Pooled {
    pub dims: usize,
    pub times: Vec<f64>,
    pub labels: Vec<usize>,
    pub segments: Vec<Segment>,
    pub total_horizon: f64,
    pub counts: Vec<usize>,
}

impl Pooled {
    pub fn new(streams: &[EventStream]) -> Result<Self> {
        let dims = check_streams(streams)?;
        let n: usize = streams.iter().map(EventStream::len).sum();
        let mut times = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        let mut segments = Vec::with_capacity(streams.len());
        let mut counts = vec![0; dims];
        for s in streams {
            let start = times.len();
            for e in s.events() {
                times.push(e.t);
                labels.push(e.dim);
                counts[e.dim] += 1;
            }
            segments.push(Segment {
                start,
                end: times.len(),
                horizon: s.horizon(),
            });
        }
        Ok(Self {
            dims,
            times,
            labels,
            segments,
            total_horizon: streams.iter().map(EventStream::horizon).sum(),
            counts,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// Decay is only identifiable if some realization has two events.
    pub fn require_pairs(&self) -> Result<()> {
        if self.segments.iter().any(|s| s.end - s.start >= 2) {
            Ok(())
        } else {
            Err(Error::InsufficientData(
                "every realization has fewer than two events; the decay is not identifiable".into(),
            ))
        }
    }

    /// Log-likelihood at `(mu, alpha, beta)` with a shared decay, horizon `T`.
    ///
    /// When `grad` is given it receives `∂/∂μ_p` in its first `M` slots and
    /// `∂/∂α_pq` (row-major) in the next `M²`.
    pub fn loglik(&self, mu: &[f64], alpha: &[f64], beta: f64, mut grad: Option<&mut [f64]>) -> f64 {
        let m = self.dims;
        let mut state = vec![0.0; m];
        let mut comp = vec![0.0; m];
        let mut log_sum = 0.0;
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|x| *x = 0.0);
        }
        for seg in &self.segments {
            state.iter_mut().for_each(|s| *s = 0.0);
            let mut prev = f64::NAN;
            for i in seg.start..seg.end {
                let (t, p) = (self.times[i], self.labels[i]);
                if i > seg.start {
                    let f = (-beta * (t - prev)).exp();
                    state.iter_mut().for_each(|s| *s *= f);
                }
                let row = &alpha[p * m..(p + 1) * m];
                let lambda = mu[p] + row.iter().zip(&state).map(|(a, s)| a * s).sum::<f64>();
                log_sum += lambda.ln();
                if let Some(g) = grad.as_deref_mut() {
                    let inv = 1.0 / lambda;
                    g[p] += inv;
                    for q in 0..m {
                        g[m + p * m + q] += state[q] * inv;
                    }
                }
                state[p] += 1.0;
                prev = t;
            }
            if seg.end > seg.start {
                let f = (-beta * (seg.horizon - prev)).exp();
                for q in 0..m {
                    // n_q - Σ_j e^{-β(H - t_j)} for this segment
                    comp[q] -= state[q] * f;
                }
            }
        }
        for q in 0..m {
            comp[q] += self.counts[q] as f64;
        }
        let mut total = log_sum;
        for p in 0..m {
            total -= mu[p] * self.total_horizon;
            for q in 0..m {
                total -= alpha[p * m + q] * comp[q] / beta;
            }
        }
        if let Some(g) = grad {
            for p in 0..m {
                g[p] -= self.total_horizon;
                for q in 0..m {
                    g[m + p * m + q] -= comp[q] / beta;
                }
            }
        }
        total
    }

    /// Linear-in-parameters design for a fixed decay; see [`Design`].
    pub fn design(&self, beta: f64) -> Design {
        let m = self.dims;
        let width = m + 1;
        let mut rows: Vec<Vec<f64>> = vec![Vec::new(); m];
        for (p, r) in rows.iter_mut().enumerate() {
            r.reserve(self.counts[p] * width);
        }
        let mut state = vec![0.0; m];
        let mut comp = vec![0.0; m];
        for seg in &self.segments {
            state.iter_mut().for_each(|s| *s = 0.0);
            let mut prev = f64::NAN;
            for i in seg.start..seg.end {
                let (t, p) = (self.times[i], self.labels[i]);
                if i > seg.start {
                    let f = (-beta * (t - prev)).exp();
                    state.iter_mut().for_each(|s| *s *= f);
                }
                rows[p].push(1.0);
                rows[p].extend_from_slice(&state);
                state[p] += 1.0;
                prev = t;
            }
            if seg.end > seg.start {
                let f = (-beta * (seg.horizon - prev)).exp();
                for q in 0..m {
                    comp[q] -= state[q] * f;
                }
            }
        }
        let mut linear = Vec::with_capacity(width);
        linear.push(self.total_horizon);
        for q in 0..m {
            linear.push((comp[q] + self.counts[q] as f64) / beta);
        }
        Design {
            dims: m,
            rows,
            linear,
        }
    }
}

/// For a fixed decay the log-likelihood separates over dimensions `p`:
///
/// ```text
/// ℓ_p(θ) = -c·θ + Σ_{i ∈ p} log(x_i·θ),   θ = (μ_p, α_p1, …, α_pM)
/// ```
///
/// with `x_i = (1, S_1(t_i), …, S_M(t_i))` and `c = (ΣT, C_1/β, …, C_M/β)`.
pub(crate) struct Design {
    pub dims: usize,
    /// Per dimension, rows of width `M + 1`, flattened.
    pub rows: Vec<Vec<f64>>,
    pub linear: Vec<f64>,
}

impl Design {
    pub fn width(&self) -> usize {
        self.dims + 1
    }

    /// Concave objective of one dimension.
    pub fn value(&self, p: usize, theta: &[f64]) -> f64 {
        let w = self.width();
        let lin: f64 = self.linear.iter().zip(theta).map(|(c, x)| c * x).sum();
        let logs: f64 = self.rows[p]
            .chunks_exact(w)
            .map(|x| x.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>().ln())
            .sum();
        logs - lin
    }

    /// Value, gradient and (negated) Hessian of one dimension's objective.
    pub fn value_grad_neg_hess(&self, p: usize, theta: &[f64], grad: &mut [f64], neg_hess: &mut [f64]) -> f64 {
        let w = self.width();
        grad.iter_mut().zip(&self.linear).for_each(|(g, c)| *g = -c);
        neg_hess.iter_mut().for_each(|h| *h = 0.0);
        let mut value = -self.linear.iter().zip(theta).map(|(c, x)| c * x).sum::<f64>();
        for x in self.rows[p].chunks_exact(w) {
            let lambda: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
            value += lambda.ln();
            let inv = 1.0 / lambda;
            let inv2 = inv * inv;
            for a in 0..w {
                grad[a] += x[a] * inv;
                let xa = x[a] * inv2;
                if xa != 0.0 {
                    for b in a..w {
                        neg_hess[a * w + b] += xa * x[b];
                    }
                }
            }
        }
        for a in 0..w {
            for b in 0..a {
                neg_hess[a * w + b] = neg_hess[b * w + a];
            }
        }
        value
    }
}

/// Unpacks `[μ…, α row-major…]`.
pub(crate) fn split_params(dims: usize, x: &[f64]) -> (Vec<f64>, Matrix) {
    (x[..dims].to_vec(), Matrix::from_flat(dims, x[dims..dims + dims * dims].to_vec()))
}
