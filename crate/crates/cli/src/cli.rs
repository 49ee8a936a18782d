use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hawkes_core::bayes::PredictiveKind;
use hawkes_core::estimators::{FitMethod, SequentialMode};
use hawkes_core::experiments::{ExperimentName, Scale};

#[derive(Debug, Parser)]
#[command(name = "hawkes", version, about = "Simulate, fit and diagnose exponential-kernel Hawkes processes")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "HAWKES_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate realizations by Ogata thinning.
    Sim(SimArgs),
    /// Negative log-likelihood over a decay grid with bootstrap bands.
    Scan(ScanArgs),
    /// Fit the decay (and baseline, excitation) to an event file.
    Fit(FitArgs),
    /// Conjugate posterior predictive summary of decay estimates.
    Bayes(BayesArgs),
    /// Changepoint MCMC over a sequence of decay estimates.
    Changepoint(ChangepointArgs),
    /// Run a scripted synthetic study.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory; receives results and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EventInput {
    /// Event CSV with header `realization_id,dim,t`.
    #[arg(long)]
    pub events: PathBuf,
    /// Horizon CSV with header `realization_id,horizon`.
    #[arg(long, conflicts_with = "horizon")]
    pub horizons: Option<PathBuf>,
    /// Common observation horizon; defaults to each realization's last event.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Number of dimensions; inferred from the labels when absent.
    #[arg(long)]
    pub dims: Option<usize>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct StopArgs {
    /// Simulate on [0, T].
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Stop at the n-th event.
    #[arg(long = "n-events")]
    pub n_events: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Parameter JSON `{"mu":[..],"alpha":[[..]],"beta":..}`.
    #[arg(long)]
    pub params: PathBuf,
    #[command(flatten)]
    pub stop: StopArgs,
    #[arg(long, default_value_t = 1)]
    pub realizations: usize,
    #[arg(long)]
    pub seed: u64,
    /// Simulate even when the spectral radius is at least 1.
    #[arg(long)]
    pub allow_nonstationary: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[command(flatten)]
    pub input: EventInput,
    /// Grid start (a decay, not an exponent).
    #[arg(long, default_value_t = 0.1)]
    pub lo: f64,
    #[arg(long, default_value_t = 100.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: EventInput,
    #[arg(long, value_parser = parse_method, default_value = "nonlinear")]
    pub method: FitMethod,
    /// How the per-realization estimate sequence is built.
    #[arg(long, value_parser = parse_mode, default_value = "pooled")]
    pub mode: SequentialMode,
    /// Lower decay bound.
    #[arg(long, default_value_t = 1e-3)]
    pub lo: f64,
    #[arg(long, default_value_t = 1e3)]
    pub hi: f64,
    /// Starting decay.
    #[arg(long)]
    pub init: Option<f64>,
    /// Profile evaluations for smbo.
    #[arg(long, default_value_t = 50)]
    pub budget: usize,
    #[arg(long, default_value_t = 10)]
    pub grid_points: usize,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub grid_log10_lo: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub grid_log10_hi: f64,
    /// Skip the per-realization estimate sequence.
    #[arg(long)]
    pub no_sequence: bool,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BayesArgs {
    /// Decay estimates JSON `{"values":[..],"method":..}`.
    #[arg(long)]
    pub estimates: PathBuf,
    /// Prior rate; the hypothesized decay.
    #[arg(long)]
    pub b0: f64,
    /// Prior shape; defaults to the number of estimates.
    #[arg(long)]
    pub a0: Option<f64>,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, value_parser = parse_predictive, default_value = "paper")]
    pub predictive: PredictiveKind,
    /// Seed for the bootstrap diagnosis of `b0 - β′`; omitted means no diagnosis.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ChangepointArgs {
    #[arg(long)]
    pub estimates: PathBuf,
    /// Exponential prior rate of the mean before the change.
    #[arg(long, default_value_t = 1.0)]
    pub rate1: f64,
    #[arg(long, default_value_t = 0.7)]
    pub rate2: f64,
    /// Iterations per chain, burn-in included.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_parser = parse_experiment)]
    pub name: ExperimentName,
    #[arg(long, value_parser = parse_scale, default_value = "desk")]
    pub scale: Scale,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

fn parse_method(s: &str) -> Result<FitMethod, String> {
    s.parse().map_err(|e: hawkes_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<SequentialMode, String> {
    s.parse().map_err(|e: hawkes_core::Error| e.to_string())
}

fn parse_predictive(s: &str) -> Result<PredictiveKind, String> {
    s.parse().map_err(|e: hawkes_core::Error| e.to_string())
}

fn parse_experiment(s: &str) -> Result<ExperimentName, String> {
    s.parse().map_err(|e: hawkes_core::Error| e.to_string())
}

fn parse_scale(s: &str) -> Result<Scale, String> {
    s.parse().map_err(|e: hawkes_core::Error| e.to_string())
}
