use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sdpxlab::color::{Algo, Refiner};
use sdpxlab::nn::{self, Arch, NetParams};
use sdpxlab::pdhg::{self, PdhgConfig};
use sdpxlab_bench::{maxcut, test_matrix};

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("project_psd");
    for n in [10, 20, 40] {
        let m = test_matrix(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| pdhg::project_psd(black_box(m), 1e-13).unwrap()));
    }
    g.finish();
}

fn refinement(c: &mut Criterion) {
    let inst = maxcut(10, 1);
    let mut g = c.benchmark_group("run_to_stable_n10");
    for algo in Algo::ALL {
        g.bench_function(algo.name(), |b| b.iter(|| Refiner::new(black_box(&inst)).run_to_stable(algo, None).unwrap()));
    }
    g.finish();
}

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("pdhg_solve");
    g.sample_size(10);
    let cfg = PdhgConfig::default();
    for n in [10, 20] {
        let inst = maxcut(n, 2);
        g.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| b.iter(|| pdhg::solve(black_box(inst), &cfg).unwrap()));
    }
    g.finish();
}

fn forward(c: &mut Criterion) {
    let inst = maxcut(10, 3);
    let mut g = c.benchmark_group("nn_forward_n10");
    for arch in Arch::ALL {
        let params = NetParams::seeded(arch, 8, 3, 0).unwrap();
        g.bench_function(arch.name(), |b| b.iter(|| nn::forward(black_box(&inst), &params).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, eigen, refinement, solver, forward);
criterion_main!(benches);
