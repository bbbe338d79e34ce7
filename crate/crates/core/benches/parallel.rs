//! Sequential vs rayon execution on the three data-parallel hot paths:
//! batched network forward passes, policy evaluation over environment seeds,
//! and a sweep of independent rope simulations.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dlo_core::env::{randomize_env, EnvConfig};
use dlo_core::harness::evaluate;
use dlo_core::parallel::Execution;
use dlo_core::perception::ModalityMask;
use dlo_core::rope::SimConfig;
use dlo_core::sac::DenseNet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench_forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("dense_forward");
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let batch = 256;
    let x: Vec<f32> = (0..batch * 12).map(|_| rng.random_range(-1.0..1.0)).collect();
    for (name, exec) in MODES {
        let net = DenseNet::<f32>::new(&[12, 256, 256, 6], &mut rng)
            .unwrap()
            .with_execution(exec);
        group.bench_function(BenchmarkId::new(name, batch), |b| {
            b.iter(|| black_box(net.forward(black_box(&x), batch).unwrap()))
        });
    }
    group.finish();
}

fn bench_evaluate(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    group.sample_size(10);
    let cfg = EnvConfig::default();
    let seeds: Vec<u64> = (0..8).collect();
    // A fixed forward-and-hold controller keeps the episodes long.
    let policy = |_: &[f64; 9]| [0.6, 0.0, 0.9];
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, seeds.len()), |b| {
            b.iter(|| black_box(evaluate(&policy, &cfg, ModalityMask::ALL, &seeds, 0, exec).unwrap()))
        });
    }
    group.finish();
}

fn bench_sim_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sim_sweep");
    group.sample_size(10);
    let cfg = EnvConfig::default();
    let sim = SimConfig::default();
    let ropes: Vec<_> = (0..16)
        .map(|s| randomize_env(&mut ChaCha8Rng::seed_from_u64(s), &cfg).unwrap())
        .collect();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, ropes.len()), |b| {
            b.iter(|| {
                exec.map_slice(&ropes, |r| {
                    let mut r = r.clone();
                    for _ in 0..200 {
                        r.sim_step(&sim).unwrap();
                    }
                    r.positions[r.len() - 1]
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_forward, bench_evaluate, bench_sim_sweep);
criterion_main!(benches);
