use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use inject_core::circuit::{apply_noise, build_memory_circuit, derive_elementary_model, sample, CheckOrders, ExperimentBasis, NoiseModel};
use inject_core::codes::surface;
use inject_core::decoder::{decode_shots, BpOsd, DecoderConfig};
use inject_core::distillation::{log_grid, sweep};
use inject_core::par::Execution;
use inject_core::BitVec;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sample_and_decode(c: &mut Criterion) {
    let code = surface(3).unwrap();
    let circuit = build_memory_circuit(&code, &CheckOrders::surface(3), 3, ExperimentBasis::Z).unwrap();
    let noisy = apply_noise(&circuit, &NoiseModel::uniform(3e-3)).unwrap();
    let model = derive_elementary_model(&noisy, Execution::Sequential);
    let decoder = BpOsd::new(&model.merged(), DecoderConfig::default()).unwrap();

    let mut g = c.benchmark_group("memory_surface3_512_shots");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let shots = sample(&model, 512, 7, exec);
                let syndromes: Vec<BitVec> = shots.into_iter().map(|s| s.detectors).collect();
                black_box(decode_shots(&decoder, &syndromes, exec).unwrap())
            })
        });
    }
    g.finish();
}

fn derive_model(c: &mut Criterion) {
    let code = surface(5).unwrap();
    let circuit = build_memory_circuit(&code, &CheckOrders::surface(5), 5, ExperimentBasis::Z).unwrap();
    let noisy = apply_noise(&circuit, &NoiseModel::uniform(1e-3)).unwrap();

    let mut g = c.benchmark_group("elementary_model_surface5");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| black_box(derive_elementary_model(&noisy, exec))));
    }
    g.finish();
}

fn distill(c: &mut Criterion) {
    let qs = log_grid(1e-3, 1e-1, 8);
    let rs = [0.0, 0.5, 1.0];

    let mut g = c.benchmark_group("distill_sweep_8x3");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| black_box(sweep(&qs, &rs, exec).unwrap())));
    }
    g.finish();
}

criterion_group!(benches, sample_and_decode, derive_model, distill);
criterion_main!(benches);
