use cqad::lindblad::{evolve, regression_spectrum, steady_state, EvolveOptions};
use cqad::meanfield::{mf_steady_state, MfInputs};
use cqad::models::{full_model, simplified_model, SystemParams};
use cqad::quantum::ground_state;
use cqad::spectroscopy::{gambetta_coeffs, qubit_spectrum};
use cqad::TAU;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn desk(eps: f64) -> SystemParams {
    SystemParams { eps_d: TAU * eps, ..SystemParams::desk() }
}

fn steady(c: &mut Criterion) {
    let mut g = c.benchmark_group("steady_state");
    g.sample_size(10);
    for n in [10, 20, 40] {
        let l = simplified_model(&desk(1.0), n).unwrap().liouvillian().unwrap();
        g.bench_with_input(BenchmarkId::new("simplified", n), &l, |b, l| b.iter(|| steady_state(black_box(l)).unwrap()));
    }
    let p = SystemParams { n_bar_g: 0.2, ..desk(1.0) };
    let l = full_model(&p, 6, 6).unwrap().liouvillian().unwrap();
    g.bench_function("full 2x6x6", |b| b.iter(|| steady_state(black_box(&l)).unwrap()));
    g.finish();
}

fn time_evolution(c: &mut Criterion) {
    let mut g = c.benchmark_group("evolve");
    g.sample_size(10);
    let m = simplified_model(&desk(1.0), 20).unwrap();
    let l = m.liouvillian().unwrap();
    let rho = ground_state(&m.space);
    let times: Vec<f64> = (1..=50).map(|k| 0.1 * k as f64).collect();
    g.bench_function("simplified 2x20, 5 us", |b| {
        b.iter(|| evolve(&l, &rho, &times, &[], &EvolveOptions::default()).unwrap())
    });
    g.finish();
}

fn spectra(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectra");
    g.sample_size(10);
    let p = SystemParams { g_qb: 0.0, n_bar_g: 0.5, delta_q: 0.0, delta_b: 0.0, ..SystemParams::default() };
    let m = full_model(&p, 2, 12).unwrap();
    let l = m.liouvillian().unwrap();
    let rho = m.steady_state().unwrap();
    let sm = cqad::quantum::sigma_minus(&m.space, 0).unwrap();
    let w: Vec<f64> = (0..401).map(|k| -40.0 + 0.2 * k as f64).collect();
    g.bench_function("regression 2x2x12, 401 points", |b| {
        b.iter(|| regression_spectrum(&l, &rho, &sm.dagger(), &sm, black_box(&w)).unwrap())
    });
    let c0 = gambetta_coeffs(&p);
    g.bench_function("analytic, 401 points", |b| b.iter(|| qubit_spectrum(black_box(&c0), &w, 10)));
    g.finish();
}

fn mean_field(c: &mut Criterion) {
    let inp = MfInputs::from_params(&desk(1.0));
    c.bench_function("mean-field steady state", |b| b.iter(|| mf_steady_state(black_box(&inp)).unwrap()));
}

criterion_group!(benches, steady, time_evolution, spectra, mean_field);
criterion_main!(benches);
