use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use z2top::dynamics::{IntegratorOptions, TopSystem};
use z2top::exec::Execution;
use z2top::geometry::fixtures::paper_fixture_15;
use z2top::geometry::find_hyperplane_collineation_with;
use z2top::sweep::{conservation_sweep, random_states, route_sweep};

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn conservation(c: &mut Criterion) {
    let mut group = c.benchmark_group("conservation_sweep");
    group.sample_size(10);
    let opts = IntegratorOptions::default();
    for n in [3u32, 4] {
        let sys = TopSystem::new(n).unwrap();
        let states = random_states(1, 32, sys.dimension(), 0.1, 0.5).unwrap();
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, n), &states, |b, s| {
                b.iter(|| conservation_sweep(&sys, black_box(s), &opts, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn routes(c: &mut Criterion) {
    let mut group = c.benchmark_group("route_sweep");
    group.sample_size(10);
    let opts = IntegratorOptions::default();
    let sys = TopSystem::new(4).unwrap();
    let states = random_states(2, 32, sys.dimension(), 0.1, 0.5).unwrap();
    for (name, exec) in POLICIES {
        group.bench_function(name, |b| b.iter(|| route_sweep(&sys, black_box(&states), &opts, exec).unwrap()));
    }
    group.finish();
}

fn collineation_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("hyperplane_collineation_n4");
    let target = paper_fixture_15();
    for (name, exec) in POLICIES {
        group.bench_function(name, |b| {
            b.iter(|| find_hyperplane_collineation_with(4, black_box(&target), exec).unwrap().unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, conservation, routes, collineation_search);
criterion_main!(benches);
