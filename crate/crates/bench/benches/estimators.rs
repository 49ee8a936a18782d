use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hawkes_bench::{bivariate_set, univariate_set};
use hawkes_core::estimators::{fit_decay, fit_mu_alpha, sequential_estimates, FitConfig, FitMethod, SequentialMode};

fn decay_fits(c: &mut Criterion) {
    let set = univariate_set(20, 100);
    let mut group = c.benchmark_group("fit_decay/20x100");
    group.sample_size(10);
    for method in FitMethod::ALL {
        let config = FitConfig::new(method).with_seed(1);
        group.bench_with_input(BenchmarkId::from_parameter(method), &config, |b, config| {
            b.iter(|| fit_decay(&set, config).unwrap())
        });
    }
    group.finish();
}

fn profile_step(c: &mut Criterion) {
    let set = bivariate_set(5, 200.0);
    c.bench_function("fit_mu_alpha/2d_5xT200", |b| b.iter(|| fit_mu_alpha(&set, 1.2).unwrap()));
}

fn sequence(c: &mut Criterion) {
    let set = univariate_set(30, 100);
    let config = FitConfig::new(FitMethod::Nonlinear).with_seed(1);
    let mut group = c.benchmark_group("sequential_estimates/30x100");
    group.sample_size(10);
    for mode in [SequentialMode::Iid, SequentialMode::Pooled] {
        group.bench_function(format!("{mode:?}").to_lowercase(), |b| {
            b.iter(|| sequential_estimates(&set, &config, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, decay_fits, profile_step, sequence);
criterion_main!(benches);
