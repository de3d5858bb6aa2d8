use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use fso_qos::dataset::{build_qos_table, synthesize_dataset, QosSweep, StationProfile};
use fso_qos::learners::{fit_forest_with, ForestParams};
use fso_qos::stacking::{build_level1_sample, StackConfig};
use fso_qos::{LabeledTable, LearnerSpec, Parallelism};

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

fn qos_table(days: usize) -> LabeledTable {
    let records = synthesize_dataset(&StationProfile::presets(), days, 7).unwrap();
    build_qos_table(&records, &QosSweep::default(), Parallelism::Sequential).unwrap()
}

fn forest(c: &mut Criterion) {
    let data = qos_table(10);
    let params = ForestParams::new(64, 2, 5, 1);
    let mut g = c.benchmark_group("forest_fit");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| fit_forest_with(black_box(&data), &params, mode).unwrap())
        });
    }
    g.finish();
}

fn table(c: &mut Criterion) {
    let records = synthesize_dataset(&StationProfile::presets(), 90, 7).unwrap();
    let sweep = QosSweep::default();
    let mut g = c.benchmark_group("qos_table");
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| build_qos_table(black_box(&records), &sweep, mode).unwrap())
        });
    }
    g.finish();
}

fn stacking(c: &mut Criterion) {
    let data = qos_table(3);
    let cfg = StackConfig::new(
        vec![
            LearnerSpec::Forest { n_trees: 16, mtry: None, min_leaf_size: 5, max_depth: None, seed: 3 },
            LearnerSpec::Gbr { n_trees: 30, learning_rate: 0.1, min_leaf_size: 5, max_depth: Some(4) },
            LearnerSpec::tree(5),
        ],
        3,
    );
    let mut g = c.benchmark_group("stacking_level1");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| build_level1_sample(black_box(&data), &cfg, mode).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, forest, table, stacking);
criterion_main!(benches);
