use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;
use skewflect::metrics::w1_1d;
use skewflect::rng::{stream, Purpose};
use skewflect::samplers::{run_chains, Initial, Reflection, Sampler, SamplerConfig};
use skewflect::skew::skew_project;
use skewflect::{ConvexBody, Potential, SkewField};

fn bodies() -> [(&'static str, ConvexBody, f64); 2] {
    [
        ("ball", ConvexBody::centered_ball(3, 1.0).unwrap(), 1.0),
        ("cube", ConvexBody::cube(3, 1.0).unwrap(), 2.0),
    ]
}

fn step_kernels(c: &mut Criterion) {
    let potential = Potential::GaussianStandard(3);
    let mut group = c.benchmark_group("step");
    for (name, body, a) in bodies() {
        let field = SkewField::tridiagonal(3, a).unwrap();
        let zero = SkewField::zero(3);
        let skew = Sampler::new(&body, &field, &potential, 1e-2);
        let plain = Sampler::new(&body, &zero, &potential, 1e-2);
        let x = [0.2, 0.5, -0.3];
        let xi = [3.0, 4.0, -2.0];
        group.bench_function(BenchmarkId::new("srnlmc", name), |b| {
            b.iter(|| skew.srnlmc_step(black_box(&x), black_box(&xi)))
        });
        group.bench_function(BenchmarkId::new("plmc", name), |b| {
            b.iter(|| plain.plmc_step(black_box(&x), black_box(&xi)))
        });
    }
    group.finish();
}

fn projections(c: &mut Criterion) {
    let mut rng = stream(1, 0, Purpose::Reference);
    let points: Vec<Vec<f64>> = (0..256)
        .map(|_| (0..3).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let mut group = c.benchmark_group("skew_project");
    for (name, body, a) in bodies() {
        let field = SkewField::tridiagonal(3, a).unwrap();
        group.bench_function(name, |b| {
            b.iter(|| {
                for p in &points {
                    black_box(skew_project(&body, &field, p).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn chains(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_chains");
    group.sample_size(10);
    for (name, body, a) in bodies() {
        let cfg = SamplerConfig {
            field: SkewField::tridiagonal(3, a).unwrap(),
            body,
            potential: Potential::GaussianStandard(3),
            stepsize: 1e-4,
            iterations: 500,
            chains: 256,
            initial: Initial::Point(vec![0.3, 0.6, -0.4]),
            batch_size: None,
            seed: 1,
            record_every: 50,
            reflection: Reflection::Skew,
        };
        group.bench_function(name, |b| b.iter(|| run_chains(black_box(&cfg)).unwrap()));
    }
    group.finish();
}

fn wasserstein(c: &mut Criterion) {
    let mut rng = stream(2, 0, Purpose::Reference);
    let a: Vec<f64> = (0..3000).map(|_| rng.random()).collect();
    let b: Vec<f64> = (0..3000).map(|_| rng.random()).collect();
    let short: Vec<f64> = b[..1000].to_vec();
    c.bench_function("w1_1d/3000x3000", |bch| {
        bch.iter(|| w1_1d(black_box(&a), black_box(&b)).unwrap())
    });
    c.bench_function("w1_1d/3000x1000", |bch| {
        bch.iter(|| w1_1d(black_box(&a), black_box(&short)).unwrap())
    });
}

criterion_group!(benches, step_kernels, projections, chains, wasserstein);
criterion_main!(benches);
