//! Property tests over randomly drawn parameters and states.

use cqad::lindblad::{build_liouvillian, evolve, steady_state, EvolveOptions};
use cqad::meanfield::{
    effective_params, mf_derivative, mf_steady_state, n_b_closed_form, n_b_effective_form, MfInputs,
};
use cqad::models::{
    effective_model, full_model, kerr_model, pointer_states_at, simplified_model, SystemParams, PHONON,
};
use cqad::observables::{g2_zero, phonon_phase, ringdown_protocol, wigner, RingdownOptions};
use cqad::quantum::{self, ground_state, make_space, make_state, DensityMatrix, Operator, SlotState};
use cqad::spectroscopy::{coeffs_from, qubit_spectrum};
use cqad::{expectation, C64, TAU};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

/// Small simplified-model parameter sets with rates of comparable size.
fn small_params() -> impl Strategy<Value = SystemParams> {
    (0.5..2.0f64, 1.0..5.0f64, 0.0..1.0f64, 0.2..1.5f64, -2.0..2.0f64, -2.0..2.0f64, 0.1..2.0f64, 0.0..TAU)
        .prop_map(|(gb, g1, gphi, g, dq, db, eps, phase)| SystemParams {
            gamma_b: gb,
            gamma_1: g1,
            gamma_phi: gphi,
            g_qb: g,
            delta_q: dq,
            delta_b: db,
            eps_d: eps,
            drive_phase: phase,
            ..SystemParams::desk()
        })
}

fn random_density(dims: Vec<usize>, seed: Vec<f64>) -> DensityMatrix {
    let s = make_space(&dims).unwrap();
    let n = s.total_dim();
    let a = nalgebra::DMatrix::from_fn(n, n, |i, j| C64::new(seed[(i * n + j) % seed.len()], seed[(j * n + i + 1) % seed.len()]));
    let m = &a * a.adjoint() + nalgebra::DMatrix::identity(n, n) * C64::from(0.05);
    let tr = m.trace();
    DensityMatrix::new(&s, m / tr).unwrap()
}

fn max_abs(m: &nalgebra::DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn g2_of_coherent_states_is_one(re in -2.0..2.0f64, im in -2.0..2.0f64) {
        prop_assume!(re * re + im * im > 0.01);
        let s = make_space(&[40]).unwrap();
        let rho = make_state(&s, &[SlotState::Coherent(C64::new(re, im))]).unwrap();
        prop_assert!((g2_zero(&rho, 0).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn g2_of_fock_states(n in 1usize..15) {
        let s = make_space(&[2, 20]).unwrap();
        let rho = make_state(&s, &[SlotState::Fock(0), SlotState::Fock(n)]).unwrap();
        prop_assert!((g2_zero(&rho, 1).unwrap() - (1.0 - 1.0 / n as f64)).abs() < 1e-9);
    }

    #[test]
    fn wigner_integrates_to_one(seed in prop::collection::vec(-1.0..1.0f64, 13)) {
        let rho = random_density(vec![6], seed);
        let g: Vec<f64> = (0..151).map(|k| -9.5 + 19.0 * k as f64 / 150.0).collect();
        let w = wigner(&rho, 0, &g, &g).unwrap();
        prop_assert!((w.normalization - 1.0).abs() < 0.02);
    }

    #[test]
    fn identity_expectation_is_one(seed in prop::collection::vec(-1.0..1.0f64, 17)) {
        let rho = random_density(vec![2, 3, 2], seed);
        let one = Operator::identity(rho.space());
        prop_assert!((expectation(&one, &rho).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn embedded_operators_on_distinct_slots_commute(d0 in 2usize..4, d1 in 2usize..5, d2 in 2usize..4) {
        let s = make_space(&[d0, d1, d2]).unwrap();
        let ops = [quantum::destroy(&s, 0).unwrap(), quantum::destroy(&s, 1).unwrap(), quantum::create(&s, 2).unwrap()];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    prop_assert!(ops[i].commutator(&ops[j]).max_abs() <= 1e-12);
                }
            }
            prop_assert_eq!(ops[i].dagger().dagger().to_dense(), ops[i].to_dense());
        }
    }

    #[test]
    fn liouvillian_is_linear(p in small_params(), a in -2.0..2.0f64, b in -2.0..2.0f64,
                             s1 in prop::collection::vec(-1.0..1.0f64, 11), s2 in prop::collection::vec(-1.0..1.0f64, 7)) {
        let m = simplified_model(&p, 4).unwrap();
        let l = m.liouvillian().unwrap();
        let r1 = random_density(vec![2, 4], s1);
        let r2 = random_density(vec![2, 4], s2);
        let mix = DensityMatrix::new(&m.space, r1.matrix() * C64::from(a) + r2.matrix() * C64::from(b)).unwrap();
        let lhs = l.apply(&mix);
        let rhs = l.apply(&r1).matrix() * C64::from(a) + l.apply(&r2).matrix() * C64::from(b);
        prop_assert!(max_abs(&(lhs.matrix() - rhs)) <= 1e-12 * (1.0 + max_abs(lhs.matrix())));
    }

    #[test]
    fn realizations_are_hermitian(p in small_params(), n_bar in 0.0..2.0f64) {
        let p = SystemParams { n_bar_g: n_bar, ..p };
        for h in [
            simplified_model(&p, 5).unwrap().h,
            effective_model(&p, 5).unwrap().realization.h,
            kerr_model(&p, 3, 5).unwrap().h,
            full_model(&p, 3, 16).unwrap().h,
        ] {
            prop_assert!(h.hermiticity_error() <= 1e-12);
        }
    }

    #[test]
    fn two_level_kerr_matches_simplified(p in small_params()) {
        let k = kerr_model(&p, 2, 5).unwrap();
        let s = simplified_model(&p, 5).unwrap();
        // equal up to a multiple of the identity
        let d = k.h.to_dense() - s.h.to_dense();
        let c = d[(0, 0)];
        let n = d.nrows();
        prop_assert!(max_abs(&(d - nalgebra::DMatrix::identity(n, n) * c)) <= 1e-12);
        prop_assert!((c.re + p.delta_q / 2.0).abs() <= 1e-12 && c.im == 0.0);
    }

    #[test]
    fn effective_without_probe_is_simplified(p in small_params()) {
        let p = SystemParams { eps_p: 0.0, n_bar_g: 0.0, ..p };
        let e = effective_model(&p, 5).unwrap().realization;
        let s = simplified_model(&p, 5).unwrap();
        prop_assert_eq!(e.h.to_dense(), s.h.to_dense());
        prop_assert_eq!(e.collapses.len(), s.collapses.len());
        for ((a, ra), (b, rb)) in e.collapses.iter().zip(&s.collapses) {
            prop_assert_eq!(a.to_dense(), b.to_dense());
            prop_assert_eq!(ra, rb);
        }
    }

    #[test]
    fn pointer_states_are_fixed_points(eps in 0.0..20.0f64, dr in -10.0..10.0f64, chi in -8.0..8.0f64, kappa in 1.0..20.0f64) {
        let (ag, ae) = pointer_states_at(eps, dr, chi, kappa);
        let i = C64::new(0.0, 1.0);
        // dα/dt = (i(Δ_r ± χ) − κ/2) α − i ε_p, with + for |g⟩
        let rg = C64::new(-kappa / 2.0, dr + chi) * ag - i * eps;
        let re = C64::new(-kappa / 2.0, dr - chi) * ae - i * eps;
        prop_assert!(rg.norm() <= 1e-12 * (1.0 + eps) && re.norm() <= 1e-12 * (1.0 + eps));
    }

    #[test]
    fn gambetta_coefficient_identities(kappa in 0.5..20.0f64, chi in -10.0..10.0f64, n in 0.0..3.0f64) {
        prop_assume!(chi.abs() > 1e-3);
        let c = coeffs_from(kappa, chi, n, 1.0, 0.0);
        prop_assert!((c.a.norm() - c.d_ss).abs() <= 1e-12 * (1.0 + c.d_ss));
        if n > 0.0 {
            let k2 = (kappa / 2.0).powi(2);
            prop_assert!((c.n_bar_e / c.n_bar_g - k2 / (k2 + 4.0 * chi * chi)).abs() <= 1e-12);
        }
    }

    #[test]
    fn spectrum_sum_truncation_is_adequate(kappa in 5.0..20.0f64, chi in -8.0..-1.0f64, n in 0.0..2.0f64) {
        let c = coeffs_from(kappa, chi, n, 2.0, 0.0);
        let w: Vec<f64> = (0..201).map(|k| -60.0 + 0.6 * k as f64).collect();
        let a = qubit_spectrum(&c, &w, 10).spectrum.values;
        let b = qubit_spectrum(&c, &w, 20).spectrum.values;
        let peak = b.iter().cloned().fold(0.0, f64::max);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-6 * peak);
        }
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn evolution_preserves_trace_hermiticity_and_positivity(p in small_params(), t in 0.5..5.0f64) {
        let m = simplified_model(&p, 6).unwrap();
        let l = m.liouvillian().unwrap();
        let ev = evolve(&l, &ground_state(&m.space), &[t / 2.0, t], &[], &EvolveOptions::default()).unwrap();
        let r = &ev.final_state;
        prop_assert!((r.trace() - 1.0).norm() <= 1e-8);
        prop_assert!(r.hermiticity_error() <= 1e-9);
        prop_assert!(r.min_eigenvalue() >= -1e-7);
    }

    #[test]
    fn steady_state_is_the_long_time_limit(p in small_params()) {
        let m = simplified_model(&p, 8).unwrap();
        let l = m.liouvillian().unwrap();
        // amplitudes (coherences) decay at half the population rates
        let slowest = p.gamma_b.min(p.gamma_1) / 2.0;
        let ev = evolve(&l, &ground_state(&m.space), &[20.0 / slowest], &[], &EvolveOptions::default()).unwrap();
        let ss = steady_state(&l).unwrap();
        prop_assert!(ss.trace_distance(&ev.final_state) <= 1e-6);
    }

    #[test]
    fn drive_phase_rotates_the_phonon_phase(p in small_params(), phi in -1.5..1.5f64) {
        let base = SystemParams { drive_phase: 0.0, ..p.clone() };
        let turned = SystemParams { drive_phase: phi, ..p };
        let m0 = simplified_model(&base, 10).unwrap();
        let m1 = simplified_model(&turned, 10).unwrap();
        let a = phonon_phase(&m0, &m0.steady_state().unwrap()).unwrap();
        let b = phonon_phase(&m1, &m1.steady_state().unwrap()).unwrap();
        let diff = (b - a - phi + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
        prop_assert!(diff.abs() < 1e-3);
    }

    #[test]
    fn mean_field_solutions_are_consistent(p in small_params()) {
        let inp = MfInputs::from_params(&p);
        let s = mf_steady_state(&inp).unwrap();
        let d = mf_derivative(&s.state(), &inp);
        prop_assert!(d.norm() <= 1e-10);
        prop_assert!((-1.0..=0.0).contains(&s.s_z));
        let closed = n_b_closed_form(&inp, s.s_z);
        let eff = n_b_effective_form(&inp, &effective_params(&inp, s.s_z));
        prop_assert!((s.n_b - closed).abs() <= 1e-10 * (1.0 + closed));
        prop_assert!((closed - eff).abs() <= 1e-10 * (1.0 + closed));
    }

    #[test]
    fn undriven_ringdown_stays_empty(p in small_params()) {
        let p = p.with_drive(0.0);
        let o = RingdownOptions { t_on: 2.0, t_off: 1.0, dt: 0.1, fock_phonon: 6, ..Default::default() };
        let r = ringdown_protocol(&p, &cqad::models::Variant::Simplified, &o).unwrap();
        prop_assert!(r.qubit().iter().chain(r.phonon().iter()).all(|v| v.abs() <= 1e-10));
    }
}

#[test]
fn wigner_of_a_model_state_is_normalised() {
    let p = SystemParams { eps_d: TAU * 1.0, ..SystemParams::desk() };
    let m = simplified_model(&p, 40).unwrap();
    let rho = m.steady_state().unwrap();
    let g: Vec<f64> = (0..201).map(|k| -14.0 + 28.0 * k as f64 / 200.0).collect();
    let w = wigner(&rho, PHONON, &g, &g).unwrap();
    assert!((w.normalization - 1.0).abs() < 0.02);
}

#[test]
fn liouvillian_built_from_parts_matches_model() {
    let p = SystemParams { eps_d: 1.0, ..SystemParams::desk() };
    let m = simplified_model(&p, 5).unwrap();
    let direct = build_liouvillian(&m.h, &m.collapses).unwrap();
    let rho = ground_state(&m.space);
    let a = direct.apply(&rho);
    let b = m.liouvillian().unwrap().apply(&rho);
    assert_eq!(a.matrix(), b.matrix());
}
