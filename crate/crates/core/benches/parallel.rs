//! Parallel versus sequential execution of the data-parallel stages.

use std::hint::black_box;

use cqed_core::basis::BareBasis;
use cqed_core::config::{preset, TimeConfig};
use cqed_core::correlations::{CorrelationOptions, CorrelationSuite, MeasureSet};
use cqed_core::dressing::{build_hamiltonian, dress_with};
use cqed_core::exec::Exec;
use cqed_core::pipeline::{run_readout, simulate, Network};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn dressing(c: &mut Criterion) {
    let system = preset("fig2a-hot").unwrap().system;
    let basis = BareBasis::enumerate(6);
    let h = build_hamiltonian(&system, &basis);
    let mut group = c.benchmark_group("dressing_n6");
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| b.iter(|| dress_with(black_box(&h), &basis, exec).unwrap()));
    }
    group.finish();
}

fn measures(c: &mut Criterion) {
    let mut cfg = preset("fig3-cold").unwrap();
    cfg.time = TimeConfig {
        t_max: 2.0,
        samples: 32,
    };
    let net = Network::build(&cfg, Exec::Sequential).unwrap();
    let samples = run_readout(&cfg, &net, Exec::Sequential).unwrap();
    let batch: Vec<_> = samples.iter().map(|s| (s.state, s.p_vac)).collect();
    let options = CorrelationOptions::default();
    let mut group = c.benchmark_group("measures_32_states");
    group.sample_size(10);
    for set in ["cc,qd", "ree,ge", "gqd"] {
        let measures = MeasureSet::parse_list(set).unwrap();
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, set), &batch, |b, batch| {
                b.iter(|| CorrelationSuite::evaluate_batch(batch, &measures, &options, exec))
            });
        }
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let mut cfg = preset("fig2a-hot").unwrap();
    cfg.time = TimeConfig {
        t_max: 5.0,
        samples: 201,
    };
    cfg.measures = MeasureSet::parse_list("cc,qd").unwrap();
    let mut group = c.benchmark_group("simulate_fig2a_hot");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| b.iter(|| simulate(black_box(&cfg), exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, dressing, measures, pipeline);
criterion_main!(benches);
