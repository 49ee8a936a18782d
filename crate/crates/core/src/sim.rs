//! Exact simulation by Ogata thinning.
//!
//! Between events every kernel term decays monotonically, so the total
//! intensity right after the current point bounds the intensity until the
//! next accepted event. The bound is refreshed after every candidate,
//! accepted or not.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{Decay, Event, EventStream, HawkesParams, RealizationSet};
use crate::{rng_from_seed, Error, Result};

/// Hard cap on generated events per stream; guards supercritical parameters.
pub const SAFETY_CAP: usize = 10_000_000;

/// When to stop simulating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stop {
    /// Observe on `[0, T]`.
    Horizon(f64),
    /// Stop at the n-th event; the horizon becomes its time.
    Count(usize),
}

#[derive(Debug, Clone)]
pub struct SimSpec {
    pub params: HawkesParams,
    pub stop: Stop,
    pub seed: u64,
}

impl SimSpec {
    pub fn new(params: HawkesParams, stop: Stop, seed: u64) -> Self {
        Self { params, stop, seed }
    }
}

/// Simulates one realization. Stationarity is not required.
pub fn simulate(spec: &SimSpec) -> Result<EventStream> {
    simulate_with_id(spec, spec.seed.to_string())
}

fn simulate_with_id(spec: &SimSpec, id: String) -> Result<EventStream> {
    match spec.stop {
        Stop::Horizon(t) if !(t.is_finite() && t > 0.0) => {
            return Err(Error::InvalidConfig(format!("horizon must be positive, got {t}")))
        }
        Stop::Count(0) => return Err(Error::InvalidConfig("event count must be at least 1".into())),
        _ => {}
    }
    let params = &spec.params;
    let m = params.dims();
    let mut rng = rng_from_seed(spec.seed);
    let shared = params.shared_beta();

    // excitation[p * m + q] = Σ_{t_j^q <= now} exp(-β_pq (now - t_j^q))
    let mut excitation = vec![0.0; m * m];
    let mut rates = vec![0.0; m];
    let mut now = 0.0;
    let mut events: Vec<Event> = Vec::new();

    let mut total = refresh_rates(params, &excitation, &mut rates);
    loop {
        if total <= 0.0 {
            match spec.stop {
                Stop::Horizon(_) => break,
                Stop::Count(_) => return Err(Error::ZeroIntensity),
            }
        }
        let u: f64 = 1.0 - rng.random::<f64>();
        let wait = -u.ln() / total;
        if wait <= 0.0 {
            continue;
        }
        let candidate = now + wait;
        if let Stop::Horizon(t) = spec.stop {
            if candidate > t {
                break;
            }
        }
        decay(params, shared, &mut excitation, candidate - now);
        now = candidate;
        let bound = total;
        total = refresh_rates(params, &excitation, &mut rates);

        if rng.random::<f64>() * bound <= total {
            let mut target = rng.random::<f64>() * total;
            let mut dim = m - 1;
            for (p, &r) in rates.iter().enumerate() {
                if target < r {
                    dim = p;
                    break;
                }
                target -= r;
            }
            events.push(Event { t: now, dim });
            if events.len() > SAFETY_CAP {
                return Err(Error::SafetyCapExceeded { cap: SAFETY_CAP });
            }
            for p in 0..m {
                excitation[p * m + dim] += 1.0;
            }
            total = refresh_rates(params, &excitation, &mut rates);
            if let Stop::Count(n) = spec.stop {
                if events.len() == n {
                    break;
                }
            }
        }
    }
    let horizon = match spec.stop {
        Stop::Horizon(t) => t,
        Stop::Count(_) => now,
    };
    EventStream::new(id, m, events, horizon)
}

fn decay(params: &HawkesParams, shared: Option<f64>, excitation: &mut [f64], dt: f64) {
    match shared {
        Some(beta) => {
            let f = (-beta * dt).exp();
            excitation.iter_mut().for_each(|x| *x *= f);
        }
        None => {
            let m = params.dims();
            let Decay::PerPair(b) = params.beta() else { unreachable!() };
            for p in 0..m {
                for q in 0..m {
                    excitation[p * m + q] *= (-b.get(p, q) * dt).exp();
                }
            }
        }
    }
}

fn refresh_rates(params: &HawkesParams, excitation: &[f64], rates: &mut [f64]) -> f64 {
    let m = params.dims();
    let mut total = 0.0;
    for p in 0..m {
        let alpha = params.alpha().row(p);
        let r = params.mu()[p] + (0..m).map(|q| alpha[q] * excitation[p * m + q]).sum::<f64>();
        rates[p] = r;
        total += r;
    }
    total
}

/// Simulates `reps` realizations; realization `k` uses seed `base_seed + k`
/// and id `k`.
pub fn simulate_batch(params: &HawkesParams, stop: Stop, reps: usize, base_seed: u64) -> Result<RealizationSet> {
    if reps == 0 {
        return Err(Error::EmptySet);
    }
    let streams = (0..reps)
        .into_par_iter()
        .map(|k| {
            let spec = SimSpec::new(params.clone(), stop, base_seed.wrapping_add(k as u64));
            simulate_with_id(&spec, k.to_string())
        })
        .collect::<Result<Vec<_>>>()?;
    RealizationSet::new(streams)
}
