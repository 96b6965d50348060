use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use garouter_core::analysis::sweep::{run_sweep_with, Axis, AxisSpec, Solver, SweepSpec};
use garouter_core::exec::Execution;
use garouter_core::ModelParams;

const STRATEGIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn energy_by_size(c: &mut Criterion) {
    let mut spec = SweepSpec::energy(ModelParams::default(), AxisSpec::range(Axis::Energy, -1.99, 1.99, 401));
    spec.axis2 = Some(AxisSpec::range(Axis::Sites, 2.0, 20.0, 19));
    let mut group = c.benchmark_group("closed_form_map");
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_sweep_with(black_box(&spec), exec).unwrap())
        });
    }
    group.finish();
}

fn dual_solver_spectrum(c: &mut Criterion) {
    let mut spec = SweepSpec::energy(ModelParams::default().with_size(12), AxisSpec::range(Axis::Energy, -1.99, 1.99, 201));
    spec.solver = Solver::Both;
    let mut group = c.benchmark_group("dual_solver_spectrum");
    group.sample_size(20);
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_sweep_with(black_box(&spec), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, energy_by_size, dual_solver_spectrum);
criterion_main!(benches);
