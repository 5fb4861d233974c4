use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maxprod_core::argmax::SearchMode;
use maxprod_core::bp::{build_topology, run_bp, BpConfig, MessageMode, Pairwise, Schedule, ScheduleKind, Topology};
use maxprod_core::clique::funny_matmul_with;
use maxprod_core::{Execution, Semiring};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXECUTIONS: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn matmul(c: &mut Criterion) {
    let mut group = c.benchmark_group("funny_matmul");
    group.sample_size(10);
    for n in [128usize, 256] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let a: Vec<f64> = (0..n * n).map(|_| rng.random()).collect();
        let b: Vec<f64> = (0..n * n).map(|_| rng.random()).collect();
        for (name, exec) in EXECUTIONS {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |bch, &n| {
                bch.iter(|| funny_matmul_with(&a, &b, n, Semiring::MaxSum, SearchMode::EarlyStop, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid_synchronous_bp");
    group.sample_size(10);
    let (side, n) = (20usize, 64usize);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let unary: Vec<Vec<f64>> = (0..side * side).map(|_| (0..n).map(|_| rng.random()).collect()).collect();
    let table: Vec<f64> = (0..n * n).map(|_| rng.random()).collect();
    let g = build_topology(Topology::Grid(side, side), n, Semiring::MaxSum, |v| Some(unary[v].clone()), Pairwise::Shared(table))
        .unwrap();
    for (name, exec) in EXECUTIONS {
        for mode in [MessageMode::Naive, MessageMode::Fast] {
            let config = BpConfig {
                schedule: Schedule { kind: ScheduleKind::Synchronous, budget: 5, tolerance: 0.0 },
                mode,
                execution: exec,
                ..BpConfig::default()
            };
            group.bench_function(BenchmarkId::new(name, format!("{mode:?}")), |bch| bch.iter(|| run_bp(&g, config).unwrap()));
        }
    }
    group.finish();
}

criterion_group!(benches, matmul, grid);
criterion_main!(benches);
