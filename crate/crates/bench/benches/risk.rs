use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mmrisk_core::bounds::{dirichlet_bayes_risk, DirichletSpec};
use mmrisk_core::dist::stream_rng;
use mmrisk_core::montecarlo::mc_risk;
use mmrisk_core::risk::{exact_risk_gt, exact_risk_gt_uniform};
use mmrisk_core::{DistSpec, Distribution, EstimatorSpec, Sampler, SimConfig};

fn exact(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact_risk");
    g.sample_size(10);
    for k in [250usize, 1000, 4000] {
        let d = Distribution::zipf(k, 1.0).unwrap();
        g.bench_with_input(BenchmarkId::new("pairwise", k), &d, |b, d| {
            b.iter(|| exact_risk_gt(black_box(d), 1000).unwrap())
        });
    }
    g.bench_function("uniform_fast_path_n1e4", |b| {
        b.iter(|| exact_risk_gt_uniform(black_box(11_729), 10_000).unwrap())
    });
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    let cfg = SimConfig::new(
        100,
        20_000,
        1,
        EstimatorSpec::GoodTuring,
        DistSpec::Uniform { k: 117 },
    );
    g.bench_function("mc_risk_n100_20k_reps", |b| {
        b.iter(|| mc_risk(black_box(&cfg)).unwrap())
    });
    g.finish();
}

fn dirichlet(c: &mut Criterion) {
    let mut g = c.benchmark_group("dirichlet_bayes_risk");
    for n in [100usize, 500] {
        let spec = DirichletSpec::scaled(n, 0.5).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &spec, |b, spec| {
            b.iter(|| dirichlet_bayes_risk(n, black_box(spec)).unwrap())
        });
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sampler");
    // Below and above the alias-table threshold.
    for k in [32usize, 22_027] {
        let d = Distribution::pc(0.5, k).unwrap();
        let sampler = Sampler::new(&d);
        let mut buf = Vec::with_capacity(4096);
        g.bench_with_input(BenchmarkId::new("fill_4096", k), &k, |b, _| {
            let mut rng = stream_rng(3, 0);
            b.iter(|| sampler.fill(&mut rng, 4096, black_box(&mut buf)))
        });
    }
    g.finish();
}

criterion_group!(benches, exact, monte_carlo, dirichlet, sampling);
criterion_main!(benches);
