//! Parallel vs sequential sweep throughput on a shrunk occupation grid.
//! Run with `cargo bench -p cbh-cli`; compare against the sequential
//! baseline or a `--no-default-features` build to size the rayon payoff.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use cbh_cli::spec::{GridSpec, OutputFormat, SweepMode, SweepSpec};
use cbh_cli::sweep::{run_sweep, run_sweep_seq};
use cbh_core::model::SystemParams;
use cbh_core::solver::SolverConfig;
use cbh_core::thermo::ReferenceFrequencies;

fn bench_spec() -> SweepSpec {
    SweepSpec {
        mode: SweepMode::CommonOccupation,
        params: SystemParams::new(1, 1.0, 0.1, 0.0, 0.0).unwrap(),
        grid: GridSpec::new(0.2, 1.6, 0.2).unwrap(),
        fixed_n: vec![],
        freqs: ReferenceFrequencies::default(),
        solver: SolverConfig::default(),
        fd_step: None,
        format: OutputFormat::Csv,
        out: None,
    }
}

fn sweep_benches(c: &mut Criterion) {
    let spec = bench_spec();
    let mut group = c.benchmark_group("sweep_8_points");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| run_sweep(black_box(&spec)).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| run_sweep_seq(black_box(&spec)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sweep_benches);
criterion_main!(benches);
