use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mwlab_core::kernels::{bessel_value, BesselTable};
use mwlab_core::weights::{ap_constant, weighted_lp_norm, CounterexampleParams, counterexample_weights};
use mwlab_core::{make_grid, ExponentTuple, FamilySpec, SampledFunction, WeightExpr};

fn bessel(c: &mut Criterion) {
    c.bench_function("bessel_value D2 t1.1", |b| b.iter(|| bessel_value(1.1, 2, black_box(0.01)).unwrap()));
    let table = BesselTable::new(1.1, 2).unwrap();
    c.bench_function("bessel_table eval", |b| b.iter(|| table.eval(black_box(0.37))));
    c.bench_function("bessel_table build", |b| b.iter(|| BesselTable::new(black_box(0.75), 1).unwrap()));
}

fn weights(c: &mut Criterion) {
    let fam = FamilySpec::default_for(1).build().unwrap();
    let w = WeightExpr::power(vec![0.0], 0.5);
    c.bench_function("ap_constant |x|^0.5 p2", |b| b.iter(|| ap_constant(black_box(&w), 2.0, &fam).unwrap()));

    let params = CounterexampleParams::new(1, 1, 1.0, ExponentTuple::new(vec![2.0]).unwrap(), 0.1).unwrap();
    let mw = counterexample_weights(&params);
    let g = make_grid(1, 4.0, 4096).unwrap();
    let f = SampledFunction::from_real_fn(g, |x| (-x[0] * x[0] * 16.0).exp());
    c.bench_function("weighted_lp_norm N4096", |b| b.iter(|| weighted_lp_norm(&f, &mw.weights[0], 2.0).unwrap()));
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bessel, weights
);
criterion_main!(benches);
