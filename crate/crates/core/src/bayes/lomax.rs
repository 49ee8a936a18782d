use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::Rng;

/// Lomax (Pareto type II) distribution with density
/// `shape/scale · (1 + x/scale)^{-(shape+1)}` on `x >= 0`.
///
/// It is the marginal of `x ~ Exponential(rate λ)` with `λ ~ Gamma(shape, rate = scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lomax {
    pub shape: f64,
    pub scale: f64,
}

impl Lomax {
    /// `None` when the shape does not exceed 1.
    pub fn mean(&self) -> Option<f64> {
        (self.shape > 1.0).then(|| self.scale / (self.shape - 1.0))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            1.0 - (1.0 + x / self.scale).powf(-self.shape)
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.shape / self.scale * (1.0 + x / self.scale).powf(-(self.shape + 1.0))
        }
    }

    /// Inverse CDF: `scale · ((1 - u)^{-1/shape} - 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        self.scale * ((1.0 - u).powf(-1.0 / self.shape) - 1.0)
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}
