use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants split into input-validation failures and numerical failures; the
/// CLI maps the two groups onto distinct exit codes via [`Error::is_numerical`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("negative or zero rate in {0}")]
    NegativeRate(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("realization {realization}: event {index} at t={t} does not strictly follow the previous event")]
    NonMonotoneTime {
        realization: String,
        index: usize,
        t: f64,
    },
    #[error("event dimension {dim} out of range for a {dims}-dimensional process")]
    DimOutOfRange { dim: usize, dims: usize },
    #[error("horizon {horizon} precedes last event time {last}")]
    HorizonBeforeLastEvent { horizon: f64, last: f64 },
    #[error("event stream is empty")]
    EmptyStream,
    #[error("realization set is empty")]
    EmptySet,
    #[error("empty input")]
    EmptyInput,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("simulation exceeded the safety cap of {cap} events")]
    SafetyCapExceeded { cap: usize },
    #[error("total intensity is zero; the requested event count can never be reached")]
    ZeroIntensity,
    #[error("process is not stationary: spectral radius {rho:.6} >= 1")]
    NonStationary { rho: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),
    #[error("EM log-likelihood decreased at iteration {iter}: {before} -> {after}")]
    LikelihoodDecrease { iter: usize, before: f64, after: f64 },

    #[error("predictive shape {shape} must exceed 1 for the mean to exist")]
    ShapeTooSmall { shape: f64 },
    #[error("bootstrap needs at least 2 resamples, got {0}")]
    TooFewResamples(usize),
    #[error("decay estimate {index} is not positive ({value})")]
    NonPositiveEstimate { index: usize, value: f64 },
    #[error("MCMC chain is degenerate: post burn-in acceptance {rate:.4} for {block}")]
    DegenerateChain { block: &'static str, rate: f64 },
}

impl Error {
    /// True for failures of a numerical procedure rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence(_)
                | Error::LikelihoodDecrease { .. }
                | Error::DegenerateChain { .. }
                | Error::SafetyCapExceeded { .. }
                | Error::ZeroIntensity
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
