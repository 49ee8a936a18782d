use hawkes_core::estimators::{FitMethod, SequentialMode};
use hawkes_core::experiments::{
    exp_changepoint, exp_estimate_distribution, exp_estimator_bench, exp_influence_direction, run_experiment,
    BenchConfig, ChangepointExpConfig, DistributionConfig, ExperimentName, InfluenceConfig, Scale,
};

#[test]
fn break_widens_distance_to_gaussian_in_most_seeds() {
    let wins = (0..50)
        .filter(|&s| {
            let o = exp_estimate_distribution(&DistributionConfig::for_scale(Scale::Desk, s)).unwrap();
            o.ks_break >= o.ks_single
        })
        .count();
    assert!(wins >= 45, "{wins}/50");
}

#[test]
fn bench_baselines_and_envelope() {
    for seed in 0..4 {
        let out = exp_estimator_bench(&BenchConfig::for_scale(Scale::Desk, seed)).unwrap();
        let given = out.row("given-beta").unwrap();
        assert_eq!(given.rmse.mean, 0.0);

        let worst = out.row("wrong-beta++").unwrap();
        for b in ["given-beta", "wrong-beta", "wrong-beta+"] {
            let r = out.row(b).unwrap();
            assert!(worst.ks.mean >= r.ks.mean, "seed {seed}: {b}");
            assert!(worst.loglik_per_event.mean <= r.loglik_per_event.mean, "seed {seed}: {b}");
        }
        for m in FitMethod::ALL {
            let r = out.row(m.name()).unwrap();
            assert!(r.loglik_per_event.mean >= given.loglik_per_event.mean - 0.01, "seed {seed}: {m}");
            assert!(r.ks.mean <= given.ks.mean + 0.05, "seed {seed}: {m}");
        }
    }
}

#[test]
fn changepoint_ordering_recovered_for_other_break_positions() {
    let config = ChangepointExpConfig {
        kstars: vec![30, 70],
        methods: vec![FitMethod::Nonlinear, FitMethod::Grid, FitMethod::Em],
        repetitions: 10,
        mode: SequentialMode::Iid,
        ..ChangepointExpConfig::for_scale(Scale::Desk, 41)
    };
    let out = exp_changepoint(&config).unwrap();
    assert_eq!(out.rows.len(), 6);
    for row in &out.rows {
        assert!(
            row.ordering_accuracy.mean >= 0.8,
            "k* = {} {}: {:?}",
            row.kstar,
            row.method,
            row.ordering_accuracy
        );
    }
}

#[test]
fn influence_rejects_nonstationary_grid_before_simulating() {
    let config = InfluenceConfig {
        c_values: vec![0.75, 3.0],
        alpha_self: [0.9, 0.9],
        ..InfluenceConfig::for_scale(Scale::Desk, 0)
    };
    let err = exp_influence_direction(&config).unwrap_err();
    assert!(err.to_string().contains("not stationary"), "{err}");
}

#[test]
fn reports_echo_config_and_rerun_identically() {
    let a = run_experiment(ExperimentName::LoglikScan, Scale::Desk, 3).unwrap();
    let b = run_experiment(ExperimentName::LoglikScan, Scale::Desk, 3).unwrap();
    assert_eq!(a.tables, b.tables);
    assert_eq!(a.summary, b.summary);
    assert_eq!(a.config["large_grid"].as_array().unwrap().len(), 60);
    assert!(a.intervals_bracket());
    assert!(!a.ci_method.is_empty());

    let inf = InfluenceConfig::for_scale(Scale::Desk, 0);
    assert_eq!(inf.c_values.first(), Some(&0.75));
    assert_eq!(inf.c_values.last(), Some(&1.25));
}
