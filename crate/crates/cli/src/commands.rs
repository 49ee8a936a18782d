use std::time::Instant;

use anyhow::{bail, Context, Result};
use hawkes_core::bayes::{self, GammaExpModel};
use hawkes_core::changepoint::{mcmc_chains, r_hat, ChangepointModel, McmcConfig};
use hawkes_core::estimators::{fit_decay, sequential_estimates, FitConfig, GridSpec};
use hawkes_core::experiments::run_experiment;
use hawkes_core::io::{self, Horizons};
use hawkes_core::likelihood::{linear_grid, log_grid, loglik_scan};
use hawkes_core::sim::{simulate_batch, Stop};
use hawkes_core::{spectral_radius, Error, RealizationSet};
use serde_json::json;

use crate::cli::{BayesArgs, ChangepointArgs, EventInput, ExperimentArgs, FitArgs, ScanArgs, SimArgs, Spacing};
use crate::manifest::Run;

fn read_events(run: &mut Run, input: &EventInput) -> Result<RealizationSet> {
    let text = run.read_input(&input.events)?;
    let horizons = match (&input.horizons, input.horizon) {
        (Some(p), _) => Horizons::PerRealization(io::parse_horizons(&run.read_input(p)?).with_context(|| format!("in {}", p.display()))?),
        (None, Some(t)) => Horizons::Common(t),
        (None, None) => Horizons::LastEvent,
    };
    Ok(io::parse_events_str(&text, input.dims, &horizons).with_context(|| format!("in {}", input.events.display()))?)
}

fn input_echo(input: &EventInput) -> serde_json::Value {
    json!({
        "events": input.events.display().to_string(),
        "horizons": input.horizons.as_ref().map(|p| p.display().to_string()),
        "horizon": input.horizon,
        "dims": input.dims,
    })
}

pub fn sim(args: &SimArgs) -> Result<()> {
    let mut run = Run::start(&args.common.out, "sim")?;
    let params = io::parse_params_str(&run.read_input(&args.params)?).with_context(|| format!("in {}", args.params.display()))?;
    let rho = spectral_radius(&params);
    if rho >= 1.0 && !args.allow_nonstationary {
        return Err(Error::NonStationary { rho }).context(format!(
            "refusing to simulate: spectral radius ρ = {rho:.6} >= 1 (pass --allow-nonstationary to simulate anyway)"
        ));
    }
    let stop = match (args.stop.horizon, args.stop.n_events) {
        (Some(t), _) => Stop::Horizon(t),
        (None, Some(n)) => Stop::Count(n),
        (None, None) => bail!("one of --horizon or --n-events is required"),
    };
    let set = simulate_batch(&params, stop, args.realizations, args.seed)?;
    run.write("events.csv", &io::write_events(&set))?;
    run.write("horizons.csv", &io::write_horizons(&set))?;
    run.write_json(
        "sim.json",
        &json!({
            "spectral_radius": rho,
            "realizations": set.len(),
            "events": set.iter().map(|s| s.len()).collect::<Vec<_>>(),
        }),
    )?;
    let config = json!({
        "params": params.to_doc(),
        "stop": stop,
        "realizations": args.realizations,
        "allow_nonstationary": args.allow_nonstationary,
        "seed": args.seed,
    });
    run.finish(config, Some(args.seed))
}

pub fn scan(args: &ScanArgs) -> Result<()> {
    let mut run = Run::start(&args.common.out, "scan")?;
    let params = io::parse_params_str(&run.read_input(&args.params)?).with_context(|| format!("in {}", args.params.display()))?;
    let set = read_events(&mut run, &args.input)?;
    if !(args.lo > 0.0 && args.lo <= args.hi) {
        return Err(Error::InvalidConfig(format!("grid needs 0 < lo <= hi, got [{}, {}]", args.lo, args.hi)).into());
    }
    let grid = match args.spacing {
        Spacing::Log => log_grid(args.points, args.lo.log10(), args.hi.log10()),
        Spacing::Linear => linear_grid(args.points, args.lo, args.hi),
    };
    let result = loglik_scan(&params, &set, &grid, args.seed)?;
    run.write("scan.csv", &result.to_csv())?;
    run.write_json(
        "scan.json",
        &json!({ "argmin_beta": result.beta_grid[result.argmin()], "scan": result }),
    )?;
    let config = json!({
        "params": params.to_doc(),
        "input": input_echo(&args.input),
        "grid": grid,
        "seed": args.seed,
    });
    run.finish(config, Some(args.seed))
}

pub fn fit(args: &FitArgs) -> Result<()> {
    let mut run = Run::start(&args.common.out, "fit")?;
    let set = read_events(&mut run, &args.input)?;
    let config = FitConfig {
        method: args.method,
        bounds: [args.lo, args.hi],
        budget: args.budget,
        grid: GridSpec {
            count: args.grid_points,
            log10_lo: args.grid_log10_lo,
            log10_hi: args.grid_log10_hi,
        },
        init: args.init,
        seed: args.seed,
        ..FitConfig::default()
    };
    config.validate()?;
    let started = Instant::now();
    let fit = fit_decay(&set, &config)?;
    let runtime = started.elapsed().as_secs_f64();
    run.write_json(
        "fit.json",
        &json!({
            "method": fit.method,
            "beta_hat": fit.beta,
            "mu": fit.mu,
            "alpha": fit.alpha.to_rows(),
            "converged": fit.converged,
            "runtime_seconds": runtime,
            "loglik": fit.loglik,
            "at_bound": fit.at_bound,
            "evaluations": fit.evaluations,
            "realizations": set.len(),
            "events": set.total_events(),
        }),
    )?;
    if !args.no_sequence {
        let est = sequential_estimates(&set, &config, args.mode)?;
        run.write_json("estimates.json", &est)?;
    }
    let echo = json!({
        "input": input_echo(&args.input),
        "fit": config,
        "mode": args.mode,
        "sequence": !args.no_sequence,
    });
    run.finish(echo, Some(args.seed))
}

pub fn bayes(args: &BayesArgs) -> Result<()> {
    let mut run = Run::start(&args.common.out, "bayes")?;
    let est = io::parse_estimates_str(&run.read_input(&args.estimates)?).with_context(|| format!("in {}", args.estimates.display()))?;
    if est.is_empty() {
        return Err(Error::EmptyInput).context("no decay estimates");
    }
    let model = match args.a0 {
        Some(a0) => GammaExpModel::new(a0, args.b0)?,
        None => GammaExpModel::with_default_shape(args.b0, &est)?,
    };
    let summary = bayes::summarize(&model, &est, args.level, args.predictive)?;
    let diagnosis = match args.seed {
        Some(seed) => Some(bayes::diagnose(&model, &est, args.predictive, args.level, args.resamples, seed)?),
        None => None,
    };
    run.write_json("bayes.json", &json!({ "summary": summary, "diagnosis": diagnosis }))?;
    let config = json!({
        "estimates": args.estimates.display().to_string(),
        "a0": model.a0,
        "b0": model.b0,
        "level": args.level,
        "predictive": args.predictive,
        "resamples": args.seed.map(|_| args.resamples),
        "seed": args.seed,
    });
    run.finish(config, args.seed)
}

pub fn changepoint(args: &ChangepointArgs) -> Result<()> {
    let mut run = Run::start(&args.common.out, "changepoint")?;
    let est = io::parse_estimates_str(&run.read_input(&args.estimates)?).with_context(|| format!("in {}", args.estimates.display()))?;
    let model = ChangepointModel::new(args.rate1, args.rate2)?;
    let config = McmcConfig {
        n_samples: args.samples,
        burn_in: args.burn_in,
        thin: args.thin,
        seed: args.seed,
    };
    let chains = mcmc_chains(&est, &model, &config, args.chains)?;
    for (c, post) in chains.iter().enumerate() {
        let name = if c == 0 { "samples.csv".to_string() } else { format!("samples_chain{c}.csv") };
        run.write(&name, &post.to_csv())?;
    }
    let summaries: Vec<_> = chains.iter().map(|p| p.summarize()).collect();
    let pooled = {
        let mut all = chains[0].clone();
        all.draws = chains.iter().flat_map(|p| p.draws.iter().copied()).collect();
        all.summarize()
    };
    let r_hat_of = |f: fn(&hawkes_core::changepoint::Draw) -> f64| -> Option<f64> {
        (chains.len() > 1).then(|| r_hat(&chains.iter().map(|p| p.draws.iter().map(f).collect()).collect::<Vec<_>>()))
    };
    run.write_json(
        "summary.json",
        &json!({
            "summary": pooled,
            "kappa_pmf": chains.len().eq(&1).then(|| chains[0].kappa_pmf()),
            "chains": summaries,
            "r_hat_b1": r_hat_of(|d| d.b1),
            "r_hat_b2": r_hat_of(|d| d.b2),
            "step_b1": chains.iter().map(|p| p.step_b1).collect::<Vec<_>>(),
            "step_b2": chains.iter().map(|p| p.step_b2).collect::<Vec<_>>(),
        }),
    )?;
    let echo = json!({
        "estimates": args.estimates.display().to_string(),
        "model": model,
        "mcmc": config,
        "burn_in_effective": config.burn_in(),
        "chains": args.chains,
    });
    run.finish(echo, Some(args.seed))
}

pub fn experiment(args: &ExperimentArgs) -> Result<()> {
    let mut run = Run::start(&args.common.out, "experiment")?;
    let report = run_experiment(args.name, args.scale, args.seed)?;
    for table in &report.tables {
        run.write(&format!("{}.csv", table.name), &table.to_csv())?;
    }
    run.write_json("report.json", &report)?;
    let echo = json!({
        "name": args.name,
        "scale": args.scale,
        "seed": args.seed,
        "experiment_config": report.config,
    });
    run.finish(echo, Some(args.seed))
}
