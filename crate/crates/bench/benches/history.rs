use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracwave_bench::{test_vector, Fixture};
use fracwave_core::mlf::RelaxationKernel;
use fracwave_core::stepper::{direct_weights, run, HistoryStore, MemoryState};
use fracwave_core::{MeshKind, RunOptions, Scheme};

fn memory_update(c: &mut Criterion) {
    let mut group = c.benchmark_group("memory_update");
    for n in [16, 32, 64] {
        let fx = Fixture::new(MeshKind::Quadrilateral, n, 0.5, 1000);
        let v = test_vector(fx.width(), 1);
        let mut mem = MemoryState::new(&fx.soe, fx.problem.material.tau_sigma, fx.dt, fx.width()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                mem.advance(black_box(&v));
                black_box(mem.sum()[0])
            })
        });
    }
    group.finish();
}

fn direct_convolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("direct_convolution");
    let fx = Fixture::new(MeshKind::Quadrilateral, 32, 0.5, 1000);
    let kernel = RelaxationKernel::new(0.5, fx.problem.material.tau_sigma).unwrap();
    let weights = direct_weights(&kernel, fx.dt, 1000).unwrap();
    for len in [100, 400, 1000] {
        let mut store = HistoryStore::with_capacity(fx.width(), len);
        for k in 0..len {
            store.push(&test_vector(fx.width(), k as u64));
        }
        let mut out = vec![0.0; fx.width()];
        group.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, _| {
            b.iter(|| {
                store.convolve(black_box(&weights), &mut out);
                black_box(out[0])
            })
        });
    }
    group.finish();
}

fn full_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("full_run_n16");
    group.sample_size(10);
    let fx = Fixture::new(MeshKind::Quadrilateral, 16, 0.5, 400);
    let opts = RunOptions { soe: Some(fx.soe.clone()), ..RunOptions::default() };
    for scheme in [Scheme::Fast, Scheme::Direct] {
        for steps in [200, 400] {
            group.bench_with_input(BenchmarkId::new(scheme.as_str(), steps), &steps, |b, &steps| {
                b.iter(|| run(&fx.problem, &fx.mesh, scheme, steps, &opts).unwrap().error)
            });
        }
    }
    group.finish();
}

criterion_group!(benches, memory_update, direct_convolution, full_runs);
criterion_main!(benches);
