use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use holojet::fuchsian::{enumerate, pair_series};
use holojet::jetext::{extend, jet_extract};
use holojet::specfun::{c_alpha, moment_sum};
use holojet::{Complex64, DiskPoint, GeneratorSet, JetSpec, QuadratureSpec};
use holojet_bench::{sample_pairs, series_differential};

fn bench_extend(c: &mut Criterion) {
    let mut group = c.benchmark_group("extend");
    let pairs = sample_pairs();
    for nodes in [32, 64, 128] {
        let q = QuadratureSpec::new(nodes).unwrap();
        let psi = series_differential(4);
        group.bench_with_input(BenchmarkId::new("nodes", nodes), &q, |b, q| {
            b.iter(|| {
                for p in &pairs {
                    black_box(extend(&psi, p, q).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn bench_jets(c: &mut Criterion) {
    let q = QuadratureSpec::default();
    let psi = series_differential(2);
    let f = |z: Complex64, w: Complex64| holojet::jetext::extend_complex(&psi, z, w, &q).unwrap();
    let z = DiskPoint::from_parts(0.3, -0.2).unwrap();
    c.bench_function("jet_extract/n=4", |b| {
        b.iter(|| black_box(jet_extract(&f, z, 4, &JetSpec::default()).unwrap()))
    });
}

fn bench_enumerate(c: &mut Criterion) {
    let gens = GeneratorSet::regular_octagon();
    let mut group = c.benchmark_group("enumerate");
    group.sample_size(10);
    for len in [3, 4, 5] {
        group.bench_with_input(BenchmarkId::new("octagon", len), &len, |b, &len| {
            b.iter(|| black_box(enumerate(&gens, len).unwrap()))
        });
    }
    group.finish();
    let ball = enumerate(&gens, 4).unwrap();
    let p = sample_pairs()[3];
    c.bench_function("pair_series/L=4", |b| {
        b.iter(|| black_box(pair_series(&ball, 4, &p)))
    });
}

fn bench_norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("norms");
    for &alpha in &[-0.5, 0.0, 2.0] {
        group.bench_with_input(BenchmarkId::new("c_alpha/N=6", alpha), &alpha, |b, &a| {
            b.iter(|| black_box(c_alpha(6, a).unwrap()))
        });
    }
    group.bench_function("moment_sum/N=6/M=1e4", |b| {
        b.iter(|| black_box(moment_sum(6, 0.0, 10_000).unwrap()))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_extend,
    bench_jets,
    bench_enumerate,
    bench_norms
);
criterion_main!(benches);
