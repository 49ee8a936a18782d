//! Seeded fixtures shared by the benchmarks.

use hawkes_core::sim::{simulate, simulate_batch, SimSpec, Stop};
use hawkes_core::{EventStream, HawkesParams, Matrix, RealizationSet};

pub fn univariate_params() -> HawkesParams {
    HawkesParams::univariate(1.2, 0.6, 0.8).expect("valid parameters")
}

pub fn bivariate_params() -> HawkesParams {
    let alpha = Matrix::from_rows(&[vec![0.1, 0.35], vec![0.7, 0.2]]).expect("square");
    HawkesParams::shared(vec![0.1, 0.5], alpha, 1.2).expect("valid parameters")
}

/// One univariate stream stopped at its `n`-th event.
pub fn univariate_stream(n: usize) -> EventStream {
    simulate(&SimSpec::new(univariate_params(), Stop::Count(n), 1)).expect("simulation")
}

pub fn univariate_set(realizations: usize, events: usize) -> RealizationSet {
    simulate_batch(&univariate_params(), Stop::Count(events), realizations, 1).expect("simulation")
}

pub fn bivariate_set(realizations: usize, horizon: f64) -> RealizationSet {
    simulate_batch(&bivariate_params(), Stop::Horizon(horizon), realizations, 1).expect("simulation")
}
