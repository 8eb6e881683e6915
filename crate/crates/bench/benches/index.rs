use criterion::{black_box, criterion_group, criterion_main, Criterion};
use indexlab_core::appendixprops::interpolation_suite;
use indexlab_core::callias::{callias_check, CalliasOptions};
use indexlab_core::dirac1d::{solve_index, GridSpec, IndexOptions};
use indexlab_core::scenarios::{random_index_path, random_sf_path, scalar_path};
use indexlab_core::specflow::{linspace, sf_crossings, CrossingOptions};
use indexlab_core::HermitianOperator;

fn crossings(c: &mut Criterion) {
    let path = random_sf_path(7, 8, 64).unwrap();
    let opts = CrossingOptions::default();
    c.bench_function("sf_crossings k=8", |b| b.iter(|| sf_crossings(black_box(&path), &opts).unwrap()));
}

fn index_1d(c: &mut Criterion) {
    let path = scalar_path(linspace(-8.0, 8.0, 161), f64::tanh).unwrap().with_compact_set(&[(-1.0, 1.0)]).unwrap();
    let grid = GridSpec::with_spacing(8.0, 0.05).unwrap();
    let fast = IndexOptions { refine: false, ..Default::default() };
    c.bench_function("tanh index h=0.05", |b| b.iter(|| solve_index(black_box(&path), grid, 1.0, &fast).unwrap()));
}

fn callias(c: &mut Criterion) {
    let path = random_index_path(3, 3).unwrap();
    let target = HermitianOperator::scalar(3, 1.0);
    let alt = HermitianOperator::scalar(3, -1.0);
    let opts = CalliasOptions::default();
    c.bench_function("callias k=3", |b| b.iter(|| callias_check(black_box(&path), &target, &alt, &opts).unwrap()));
}

fn suites(c: &mut Criterion) {
    c.bench_function("interpolation suite 100", |b| b.iter(|| interpolation_suite(black_box(1), 100).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = crossings, index_1d, callias, suites
}
criterion_main!(benches);
