use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hawkes_bench::{bivariate_params, bivariate_set, univariate_params, univariate_stream};
use hawkes_core::likelihood::{loglik_multi, loglik_uni, loglik_uni_naive, LoglikOptions};

fn univariate(c: &mut Criterion) {
    let params = univariate_params();
    let mut group = c.benchmark_group("loglik_uni");
    for n in [100, 1000, 10_000] {
        let s = univariate_stream(n);
        group.bench_with_input(BenchmarkId::new("recursive", n), &s, |b, s| {
            b.iter(|| loglik_uni(&params, black_box(s), LoglikOptions::default()).unwrap())
        });
    }
    for n in [100, 1000] {
        let s = univariate_stream(n);
        group.bench_with_input(BenchmarkId::new("naive", n), &s, |b, s| {
            b.iter(|| loglik_uni_naive(&params, black_box(s), LoglikOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn bivariate(c: &mut Criterion) {
    let params = bivariate_params();
    let set = bivariate_set(1, 1000.0);
    c.bench_function("loglik_multi/2d_T1000", |b| {
        b.iter(|| loglik_multi(&params, black_box(&set[0]), LoglikOptions::default()).unwrap())
    });
}

criterion_group!(benches, univariate, bivariate);
criterion_main!(benches);
