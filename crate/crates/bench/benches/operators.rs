use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mwlab_core::maximal::sharp_maximal_t;
use mwlab_core::operators::{apply_multiplier, model_symbol};
use mwlab_core::sharpness::{run_sharpness_experiment, SharpnessConfig};
use mwlab_core::{make_grid, CubeFamily, SampledFunction};

fn multiplier(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_multiplier");
    for (l, n) in [(1, 4096), (2, 256), (2, 1024)] {
        let g = make_grid(1, 4.0, n).unwrap();
        let fs = vec![SampledFunction::from_real_fn(g, |x| (-x[0] * x[0]).exp()); l];
        let sigma = model_symbol(if l == 1 { 0.75 } else { 1.1 }, 1, l).unwrap();
        group.bench_with_input(BenchmarkId::new(format!("l{l}"), n), &fs, |b, fs| {
            b.iter(|| apply_multiplier(&sigma, black_box(fs)).unwrap())
        });
    }
    group.finish();
}

fn maximal(c: &mut Criterion) {
    let g = make_grid(1, 2.0, 256).unwrap();
    let f = SampledFunction::from_real_fn(g, |x| (3.0 * x[0]).sin());
    let fam = CubeFamily::lattice(1, -2.0, 2.0, -4, 1, 4).unwrap();
    c.bench_function("sharp_maximal t1 N256", |b| b.iter(|| sharp_maximal_t(black_box(&f), 1.0, &fam).unwrap()));
}

fn sweep(c: &mut Criterion) {
    let cfg = SharpnessConfig::multiplier(1, 1, vec![2.0], 1.0, 0.75, 0.1);
    c.bench_function("sharpness sweep scalar", |b| b.iter(|| run_sharpness_experiment(black_box(&cfg)).unwrap()));
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = multiplier, maximal, sweep
);
criterion_main!(benches);
