use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use binq_core::estimators::{scale_estimator, EstimatorId};
use binq_core::experiments::run_cell;
use binq_core::model::DEFAULT_TOLERANCE;
use binq_core::sampling::{binomial_variate, derive_stream, CountSampler, KGrid, Regime, ScenarioSpec};
use binq_core::{build_posterior, log_beta_binomial_likelihood, PriorSpec, SampleCounts};

fn sample(n: u64, p: f64, k: u64) -> SampleCounts {
    let mut rng = derive_stream(1, 2, k, 0).unwrap();
    CountSampler::new(n, p).unwrap().draw(k, &mut rng).unwrap()
}

fn likelihood(c: &mut Criterion) {
    let prior = PriorSpec::new(1.0, 1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("likelihood");
    for k in [1_000u64, 1_000_000, 1_000_000_000] {
        let counts = sample(160, 25.0 / 160.0, k);
        group.bench_with_input(BenchmarkId::from_parameter(k), &counts, |b, counts| {
            b.iter(|| log_beta_binomial_likelihood(counts, black_box(200), &prior).unwrap())
        });
    }
    group.finish();
}

fn posterior(c: &mut Criterion) {
    let mut group = c.benchmark_group("posterior_scale");
    for (gamma, k) in [(1.0, 1_000u64), (1.0, 1_000_000), (1.0, 1_000_000_000), (0.5, 1_000)] {
        let prior = PriorSpec::new(gamma, 1.0, 1.0).unwrap();
        let counts = sample(160, 25.0 / 160.0, k);
        group.bench_with_input(BenchmarkId::new(format!("gamma={gamma}"), k), &counts, |b, counts| {
            b.iter(|| scale_estimator(&build_posterior(counts, &prior, DEFAULT_TOLERANCE).unwrap()))
        });
    }
    group.finish();
}

fn sampler(c: &mut Criterion) {
    let mut group = c.benchmark_group("sampler");
    for trials in [10u64, 1_000, 10_000_000_000] {
        group.bench_with_input(BenchmarkId::new("binomial", trials), &trials, |b, &trials| {
            let mut rng = derive_stream(3, 4, 5, 6).unwrap();
            b.iter(|| binomial_variate(trials, 0.3, &mut rng).unwrap())
        });
    }
    for k in [1_000u64, 1_000_000_000] {
        group.bench_with_input(BenchmarkId::new("counts", k), &k, |b, &k| {
            let s = CountSampler::new(160, 25.0 / 160.0).unwrap();
            let mut rng = derive_stream(3, 4, 5, 6).unwrap();
            b.iter(|| s.draw(k, &mut rng).unwrap())
        });
    }
    group.finish();
}

fn cell(c: &mut Criterion) {
    let spec = ScenarioSpec {
        id: "bench".into(),
        regime: Regime::Coupled { alpha: 6.0, w: 16.0, mu: 25.0 },
        k_grid: KGrid::List(vec![1e9]),
        replications: 1,
        seed: 2024,
        paired: false,
    };
    let ids = [
        EstimatorId::Scale(PriorSpec::new(1.0, 1.0, 1.0).unwrap()),
        EstimatorId::Mle,
        EstimatorId::SampleMax,
    ];
    c.bench_function("cell/a6_w16_mu25/k=1e9", |b| {
        b.iter(|| run_cell(&spec, 1_000_000_000, 0, &ids, DEFAULT_TOLERANCE, false).unwrap())
    });
}

criterion_group!(benches, likelihood, posterior, sampler, cell);
criterion_main!(benches);
