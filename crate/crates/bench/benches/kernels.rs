use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use vortex_bench::{near_pair, tan_domain, unit_series};
use vortex_core::dynamics::{integrate, velocity, IntegrateOptions, Record};
use vortex_core::stability::{action_coefficients, hamiltonian_expansion};
use vortex_core::{Complex64, Strengths, UniSeries};

fn series(c: &mut Criterion) {
    let a = unit_series(16);
    let b = unit_series(16);
    c.bench_function("uni_mul_16", |bench| {
        bench.iter(|| black_box(&a) * black_box(&b))
    });
    let z = UniSeries::identity(12);
    let f = &z + &(&(&z * &z) * &z);
    c.bench_function("uni_revert_12", |bench| {
        bench.iter(|| black_box(&f).revert().unwrap())
    });
}

fn expansion(c: &mut Criterion) {
    let domain = tan_domain();
    let s = Strengths::new(1.0, 1.0);
    c.bench_function("hamiltonian_expansion_deg8", |bench| {
        bench.iter(|| {
            let e = hamiltonian_expansion(black_box(&domain), s, 8).unwrap();
            action_coefficients(&e)
        })
    });
}

fn dynamics(c: &mut Criterion) {
    let domain = tan_domain();
    let state = near_pair();
    c.bench_function("velocity", |bench| {
        bench.iter(|| velocity(black_box(&domain), black_box(&state)).unwrap())
    });
    let mut opts = IntegrateOptions::new(1.0, 1e-10);
    opts.record = Record::None;
    opts.monitor_energy = false;
    c.bench_function("integrate_t1", |bench| {
        bench.iter(|| integrate(&domain, black_box(&state), &opts).unwrap())
    });
    let z = Complex64::new(0.3, 0.1);
    c.bench_function("phi_eval", |bench| {
        bench.iter(|| domain.phi(black_box(z)).unwrap())
    });
}

criterion_group!(benches, series, expansion, dynamics);
criterion_main!(benches);
