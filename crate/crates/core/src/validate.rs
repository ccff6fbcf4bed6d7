//! Self-check suite: structural invariants of states and evolutions plus the
//! closed-form reference cases of every module.

use crate::error::Result;
use crate::lindblad::{build_liouvillian, evolve, regression_spectrum, steady_state, EvolveOptions, STEADY_TOL};
use crate::meanfield::{
    decoupled_population, mf_derivative, mf_evolve, mf_steady_state, phonon_linewidth, LinewidthOptions,
    LinewidthProtocol, MeanFieldState, MfInputs,
};
use crate::models::{
    build, calibrate_drive, effective_model, full_model, kerr_model, pointer_states_at, simplified_model,
    transmon_levels, SystemParams, Variant, CAVITY, PHONON, QUBIT,
};
use crate::observables::{decay_time, g2_zero, phase_of, phonon_shift_probe, wigner, DecayMethod};
use crate::quantum::{
    self, embed, embed_dense, expectation, ground_state, local, make_space, make_state, partial_trace, DensityMatrix,
    Operator, SlotState,
};
use crate::spectroscopy::{
    coeffs_from, qubit_spectrum, s21_model, transparency_fwhm, two_tone_sweep, SweepTruncation, Transparency,
};
use crate::{C64, TAU};
use nalgebra::DMatrix;
use rayon::prelude::*;

pub const TRACE_DRIFT: f64 = 1e-8;
pub const HERMITICITY: f64 = 1e-9;
pub const POSITIVITY: f64 = -1e-7;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = Result<(bool, String)>;

fn within(got: f64, want: f64, tol: f64) -> (bool, String) {
    ((got - want).abs() <= tol, format!("got {got:.6e}, want {want:.6e} (tol {tol:.0e})"))
}

fn all(parts: Vec<(bool, String)>) -> (bool, String) {
    let ok = parts.iter().all(|p| p.0);
    let d = parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join("; ");
    (ok, d)
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn max_norm(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn one_slot(d: usize, s: SlotState) -> Result<DensityMatrix> {
    make_state(&make_space(&[d])?, &[s])
}

fn structural() -> Outcome {
    let p = SystemParams::desk().with_drive(TAU * 1.0);
    let m = simplified_model(&p, 12)?;
    let l = m.liouvillian()?;
    let id = Operator::identity(&m.space);
    let mut rho = ground_state(&m.space);
    let (mut drift, mut herm, mut pos) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..6 {
        let ev = evolve(&l, &rho, &[0.25, 0.5], &[("tr", &id)], &EvolveOptions::default())?;
        for v in &ev.trace.values[0] {
            drift = drift.max((v - c(1.0)).norm());
        }
        rho = ev.final_state;
        herm = herm.max(rho.hermiticity_error());
        pos = pos.min(rho.min_eigenvalue());
    }
    let ss = steady_state(&l)?;
    let res = l.residual(&ss);
    herm = herm.max(ss.hermiticity_error());
    pos = pos.min(ss.min_eigenvalue());
    drift = drift.max((ss.trace() - c(1.0)).norm());
    Ok((
        drift <= TRACE_DRIFT && herm <= HERMITICITY && pos >= POSITIVITY && res <= STEADY_TOL,
        format!("trace drift {drift:.1e}, hermiticity {herm:.1e}, min eigenvalue {pos:.1e}, steady residual {res:.1e}"),
    ))
}

fn space_dims() -> Outcome {
    let d: Vec<usize> = [vec![2], vec![2, 60], vec![2, 60, 5]]
        .iter()
        .map(|x| make_space(x).map(|s| s.total_dim()))
        .collect::<Result<_>>()?;
    Ok((d == [2, 120, 600], format!("{d:?}")))
}

fn destroy_two_level() -> Outcome {
    Ok((local::destroy(2) == local::sigma_minus(), String::new()))
}

fn destroy_on_four() -> Outcome {
    let a = local::destroy(6);
    let mut ket = nalgebra::DVector::from_element(6, c(0.0));
    ket[4] = c(1.0);
    let out = a * ket;
    let mut want = nalgebra::DVector::from_element(6, c(0.0));
    want[3] = c(2.0);
    Ok((out == want, format!("{:?}", out.iter().map(|z| z.re).collect::<Vec<_>>())))
}

fn embed_identity() -> Outcome {
    let s = make_space(&[2, 3, 4])?;
    let e = embed_dense(local::identity(3), &s, 1)?;
    Ok((e.to_dense() == DMatrix::identity(24, 24), String::new()))
}

fn embed_sigma_z() -> Outcome {
    let s = make_space(&[2, 3])?;
    let e = embed_dense(local::pauli_z(), &s, 0)?.to_dense();
    let want = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
        [1.0, 1.0, 1.0, -1.0, -1.0, -1.0].iter().map(|&v| c(v)).collect(),
    ));
    Ok((e == want, String::new()))
}

fn embed_commute() -> Outcome {
    let s = make_space(&[3, 4])?;
    let a = embed(&Operator::local(local::destroy(3)), &s, 0)?;
    let b = embed(&Operator::local(local::destroy(4) + local::number(4)), &s, 1)?;
    let e = a.commutator(&b).max_abs();
    Ok((e <= 1e-12, format!("{e:.1e}")))
}

fn expectation_identity() -> Outcome {
    let s = make_space(&[2, 15])?;
    let rho = make_state(&s, &[SlotState::Thermal(0.3), SlotState::Coherent(C64::new(0.8, -0.4))])?;
    let v = expectation(&Operator::identity(&s), &rho)?;
    Ok(within(v.re, 1.0, 1e-12))
}

fn expectation_number_coherent() -> Outcome {
    let rho = one_slot(40, SlotState::Coherent(C64::new(1.2, 0.9)))?;
    let n = expectation(&quantum::number(rho.space(), 0)?, &rho)?.re;
    Ok(within(n, 2.25, 1e-10))
}

fn expectation_sigma_z_ground() -> Outcome {
    let s = make_space(&[2, 3])?;
    let v = expectation(&quantum::sigma_z(&s, 0)?, &ground_state(&s))?.re;
    Ok((v == -1.0, format!("{v}")))
}

fn vacuum_product() -> Outcome {
    let s = make_space(&[3, 4])?;
    let rho = make_state(&s, &[SlotState::Fock(0), SlotState::Fock(0)])?;
    let m = rho.matrix();
    let purity = (m * m).trace().re;
    Ok((rho.trace() == c(1.0) && purity == 1.0 && m[(0, 0)] == c(1.0), format!("purity {purity}")))
}

fn coherent_two() -> Outcome {
    let rho = one_slot(40, SlotState::Coherent(c(2.0)))?;
    let n = expectation(&quantum::number(rho.space(), 0)?, &rho)?.re;
    Ok(within(n, 4.0, 1e-8))
}

fn thermal_one() -> Outcome {
    let d = 30;
    let rho = one_slot(d, SlotState::Thermal(1.0))?;
    let p = rho.populations();
    let norm: f64 = (0..d).map(|n| 0.5f64.powi(n as i32 + 1)).sum();
    let err = (0..d).map(|n| (p[n] - 0.5f64.powi(n as i32 + 1) / norm).abs()).fold(0.0, f64::max);
    Ok((err <= 1e-14, format!("max deviation {err:.1e}")))
}

fn ptrace_product() -> Outcome {
    let s = make_space(&[2, 10])?;
    let rho = make_state(&s, &[SlotState::Thermal(0.4), SlotState::Coherent(C64::new(0.5, 0.5))])?;
    let r = partial_trace(&rho, &[1])?;
    let want = one_slot(10, SlotState::Coherent(C64::new(0.5, 0.5)))?;
    let e = max_norm(&(r.matrix() - want.matrix()));
    Ok((e <= 1e-14 && (r.trace() - c(1.0)).norm() <= 1e-10, format!("{e:.1e}")))
}

fn ptrace_bell() -> Outcome {
    let s = make_space(&[2, 2])?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rho = DensityMatrix::pure(&s, &[c(h), c(0.0), c(0.0), c(h)])?;
    let r = partial_trace(&rho, &[0])?;
    let e = max_norm(&(r.matrix() - DMatrix::identity(2, 2) * c(0.5)));
    Ok((e <= 1e-15, format!("{e:.1e}")))
}

fn qubit_decay_rate() -> Outcome {
    let s = make_space(&[2])?;
    let g1 = 2.3;
    let l = build_liouvillian(&Operator::zeros(&s), &[(quantum::sigma_minus(&s, 0)?, g1)])?;
    let rho = make_state(&s, &[SlotState::Fock(1)])?;
    let d = expectation(&quantum::number(&s, 0)?, &l.apply(&rho))?.re;
    Ok(within(d, -g1, 1e-14))
}

fn vacuum_stationary() -> Outcome {
    let s = make_space(&[8])?;
    let a = quantum::destroy(&s, 0)?;
    let l = build_liouvillian(&(&(&a.dagger() * &a) * 0.7), &[(a, 0.4)])?;
    let r = max_norm(l.apply(&ground_state(&s)).matrix());
    Ok((r <= 1e-12, format!("{r:.1e}")))
}

fn superop_dimension() -> Outcome {
    let s = make_space(&[2, 3])?;
    let l = build_liouvillian(&Operator::zeros(&s), &[])?;
    let sup = l.superop();
    Ok((sup.nrows == 36 && sup.ncols == 36, format!("{}x{}", sup.nrows, sup.ncols)))
}

fn free_decay_trace() -> Outcome {
    let s = make_space(&[2])?;
    let g1 = 1.7;
    let l = build_liouvillian(&Operator::zeros(&s), &[(quantum::sigma_minus(&s, 0)?, g1)])?;
    let n = quantum::number(&s, 0)?;
    let times: Vec<f64> = (1..=20).map(|k| 0.1 * k as f64).collect();
    let ev = evolve(&l, &make_state(&s, &[SlotState::Fock(1)])?, &times, &[("n", &n)], &EvolveOptions::default())?;
    let err = times.iter().zip(&ev.trace.values[0]).map(|(t, v)| (v.re / (-g1 * t).exp() - 1.0).abs()).fold(0.0, f64::max);
    Ok((err <= 1e-6, format!("max relative error {err:.1e}")))
}

fn vacuum_rabi(p: &SystemParams) -> Result<(f64, f64)> {
    let q = SystemParams { gamma_1: 0.0, gamma_b: 0.0, gamma_phi: 0.0, eps_d: 0.0, delta_q: 0.0, delta_b: 0.0, ..p.clone() };
    let m = simplified_model(&q, 4)?;
    let l = build_liouvillian(&m.h, &[])?;
    let rho = make_state(&m.space, &[SlotState::Fock(1), SlotState::Fock(0)])?;
    let times: Vec<f64> = (1..=40).map(|k| k as f64 * 0.05 / q.g_qb * 2.0).collect();
    let ev = evolve(&l, &rho, &times, &[("e", &m.qubit_excitation())], &EvolveOptions::default())?;
    let err = times
        .iter()
        .zip(&ev.trace.values[0])
        .map(|(t, v)| (v.re - (q.g_qb * t).cos().powi(2)).abs())
        .fold(0.0, f64::max);
    let period = std::f64::consts::PI / q.g_qb;
    let back = evolve(&l, &rho, &[period], &[("e", &m.qubit_excitation())], &EvolveOptions::default())?;
    Ok((err, back.trace.values[0][0].re))
}

fn jaynes_cummings_rabi() -> Outcome {
    let (err, _) = vacuum_rabi(&SystemParams::desk())?;
    Ok((err <= 1e-7, format!("max deviation from cos^2 {err:.1e}")))
}

fn rabi_period() -> Outcome {
    let (_, back) = vacuum_rabi(&SystemParams::desk())?;
    Ok(within(back, 1.0, 1e-7))
}

fn undriven_is_vacuum(variant: Variant) -> Outcome {
    let p = SystemParams::desk();
    let m = build(&p, &variant, 6, 4)?;
    let rho = m.steady_state()?;
    let e = max_norm(&(rho.matrix() - ground_state(&m.space).matrix()));
    Ok((e <= 1e-10, format!("{e:.1e}")))
}

fn saturation() -> Outcome {
    let mut p = SystemParams::desk();
    p.g_qb = 0.0;
    let z: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .map(|&e| {
            let m = simplified_model(&p.with_drive(TAU * e), 2)?;
            let rho = m.steady_state()?;
            Ok(expectation(&quantum::sigma_z(&m.space, QUBIT)?, &rho)?.re)
        })
        .collect::<Result<_>>()?;
    Ok((z[2].abs() < 1e-6 && z[1].abs() < z[0].abs(), format!("<sz> = {z:?}")))
}

fn bare_qubit_line() -> Outcome {
    let s = make_space(&[2])?;
    let (g1, gp, dq) = (1.2, 0.3, 2.0);
    let sm = quantum::sigma_minus(&s, 0)?;
    let h = &quantum::sigma_z(&s, 0)? * (-dq / 2.0);
    let l = build_liouvillian(&h, &[(sm.clone(), g1), (quantum::sigma_z(&s, 0)?, gp / 2.0)])?;
    let ss = steady_state(&l)?;
    let w: Vec<f64> = (0..4001).map(|k| -8.0 + 0.004 * k as f64).collect();
    let spec = regression_spectrum(&l, &ss, &sm, &sm.dagger(), &w)?;
    let (center, _) = spec.peak();
    let gq = g1 / 2.0 + gp;
    Ok(all(vec![within(center, -dq, 0.002), within(spec.fwhm().unwrap_or(f64::NAN), 2.0 * gq, 1e-3)]))
}

fn jc_matrix_element() -> Outcome {
    let p = SystemParams::desk();
    let m = simplified_model(&p, 10)?;
    let mut worst = 0.0f64;
    for n in 1..10 {
        let e = m.space.flat_index(&[1, n - 1]);
        let g = m.space.flat_index(&[0, n]);
        worst = worst.max((m.h.get(e, g).re - p.g_qb * (n as f64).sqrt()).abs());
    }
    Ok((worst <= 1e-12, format!("{worst:.1e}")))
}

fn free_subsystems() -> Outcome {
    let p = SystemParams { g_qb: 0.0, chi: 0.0, eps_d: 0.0, eps_p: 0.0, n_bar_g: 0.0, ..SystemParams::desk() };
    let m = full_model(&p, 4, 3)?;
    let mut worst = 0.0f64;
    for slot in [QUBIT, PHONON, CAVITY] {
        worst = worst.max(m.h.commutator(&quantum::number(&m.space, slot)?).max_abs());
    }
    let h = m.h.to_dense();
    let off = (0..h.nrows()).flat_map(|i| (0..h.ncols()).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| h[(i, j)].norm()).fold(0.0, f64::max);
    Ok((worst == 0.0 && off == 0.0, format!("commutators {worst:.1e}, off-diagonal {off:.1e}")))
}

fn pointer_zero_probe() -> Outcome {
    let (g, e) = pointer_states_at(0.0, 0.3, -1.0, 2.0);
    Ok((g == c(0.0) && e == c(0.0), String::new()))
}

fn pointer_large_kappa() -> Outcome {
    let (g, e) = pointer_states_at(1.0, 0.3, -1.0, 1e12);
    Ok((g.norm() < 1e-11 && e.norm() < 1e-11, format!("{:.1e}, {:.1e}", g.norm(), e.norm())))
}

fn effective_without_probe() -> Outcome {
    let p = SystemParams { eps_p: 0.0, n_bar_g: 0.0, ..SystemParams::desk().with_drive(1.0) };
    let e = effective_model(&p, 6)?;
    let s = simplified_model(&p, 6)?;
    let dh = e.realization.h.max_abs_diff(&s.h);
    let dc = e
        .realization
        .collapses
        .iter()
        .zip(&s.collapses)
        .map(|(a, b)| a.0.max_abs_diff(&b.0) + (a.1 - b.1).abs())
        .fold(0.0, f64::max);
    Ok((
        e.gamma_phi_cav == 0.0 && e.omega_q_cav == 0.0 && dh == 0.0 && dc == 0.0,
        format!("Gphi_cav {}, wq_cav {}, dH {dh:.1e}, dC {dc:.1e}", e.gamma_phi_cav, e.omega_q_cav),
    ))
}

fn kerr_two_levels() -> Outcome {
    let p = SystemParams::desk().with_drive(0.7);
    let k = kerr_model(&p, 2, 5)?;
    let s = simplified_model(&p, 5)?;
    // equal up to the constant Δ_q/2, which has no dynamical effect
    let shifted = &k.h - &(&Operator::identity(&k.space) * (p.delta_q / 2.0));
    let d = shifted.max_abs_diff(&s.h);
    let cd = quantum::create(&k.space, QUBIT)?;
    let cc = quantum::destroy(&k.space, QUBIT)?;
    let kerr = (&(&cd * &cd) * &(&cc * &cc)).max_abs();
    Ok((d <= 1e-15 && kerr == 0.0, format!("|H_kerr - dq/2 - H_tls| {d:.1e}, |c+c+cc| {kerr:.1e}")))
}

fn transmon_ladder() -> Outcome {
    let (dq, a) = (0.37, -1.9);
    let e = transmon_levels(dq, a, 3);
    Ok((e == vec![0.0, -dq, -2.0 * dq + a], format!("{e:?}")))
}

fn calibration() -> Outcome {
    let a = calibrate_drive(-7.0, 7.0);
    let r = calibrate_drive(3.0, 0.0) / calibrate_drive(-7.0, 0.0);
    Ok(all(vec![(a == 1.0, format!("eps({a})")), within(r, 10f64.sqrt(), 1e-14)]))
}

fn mf_dark() -> Outcome {
    let p = MfInputs::from_params(&SystemParams::desk());
    let d = mf_derivative(&MeanFieldState::GROUND, &p);
    let (_, tr) = mf_evolve(&p, 2.0, 5, None)?;
    let stays = tr.iter().all(|s| *s == MeanFieldState::GROUND);
    Ok((d.norm() == 0.0 && stays, String::new()))
}

fn mf_kick() -> Outcome {
    let e = 1.3;
    let d = mf_derivative(&MeanFieldState::GROUND, &MfInputs::from_params(&SystemParams::desk().with_drive(e)));
    Ok((d.b == c(0.0) && d.s_minus == C64::new(0.0, -e) && d.s_z == 0.0, format!("{d:?}")))
}

fn mf_uncoupled_saturation() -> Outcome {
    let mut sp = SystemParams::desk().with_drive(2.0);
    sp.g_qb = 0.0;
    let p = MfInputs::from_params(&sp);
    let (_, tr) = mf_evolve(&p, 20.0, 2, None)?;
    let d = p.delta_q_tilde.powi(2) + p.gamma_2_tilde.powi(2);
    let want = -p.gamma_1 / (p.gamma_1 + 4.0 * p.gamma_2_tilde * 4.0 / d);
    Ok(within(tr[1].s_z, want, 1e-8))
}

fn mf_zero_drive() -> Outcome {
    let p = MfInputs::from_params(&SystemParams::desk());
    let s = mf_steady_state(&p)?;
    Ok((
        s.n_b == 0.0 && s.s_z == -1.0 && s.effective.gamma_eff == 2.0 * p.gamma_2_tilde,
        format!("n {} sz {} gamma_eff {}", s.n_b, s.s_z, s.effective.gamma_eff),
    ))
}

fn mf_uncoupled_population() -> Outcome {
    let mut sp = SystemParams::desk();
    sp.g_qb = 0.0;
    let base = MfInputs::from_params(&sp);
    let n: Vec<f64> = [0.1, 1.0, 10.0].iter().map(|&e| mf_steady_state(&base.with_eps(c(e))).map(|s| s.n_b)).collect::<Result<_>>()?;
    Ok((n.iter().all(|v| *v == 0.0), format!("{n:?}")))
}

fn decoupled_zero() -> Outcome {
    let v = decoupled_population(&MfInputs::from_params(&SystemParams::desk()))?;
    Ok((v == 0.0, format!("{v}")))
}

fn seeded_bare_linewidth() -> Outcome {
    let mut sp = SystemParams::desk();
    sp.g_qb = 0.0;
    let p = MfInputs::from_params(&sp);
    let o = LinewidthOptions { protocol: LinewidthProtocol::Seeded { fraction: 0.01 }, ..Default::default() };
    let r = phonon_linewidth(&p, &o)?;
    Ok(within(r.fit.fwhm / p.gamma_b, 1.0, 0.02))
}

fn gambetta_no_probe() -> Outcome {
    let g = coeffs_from(TAU * 2.897, -TAU * 1.2, 0.0, 0.9, 0.4);
    Ok((g.a == c(0.0) && g.d_ss == 0.0 && g.b == 0.0 && g.linewidth(0) == 1.8, format!("{g:?}")))
}

fn gambetta_modulus() -> Outcome {
    let mut worst = 0.0f64;
    for &(k, ch, n) in &[(1.0, 0.1, 0.2), (18.2, -7.5, 1.0), (3.0, 9.0, 2.0), (0.5, -0.01, 5.0)] {
        let g = coeffs_from(k, ch, n, 0.1, 0.0);
        worst = worst.max((g.a.norm() - g.d_ss).abs() / g.d_ss);
    }
    Ok((worst <= 1e-14, format!("{worst:.1e}")))
}

fn gambetta_bare_line() -> Outcome {
    let g = coeffs_from(5.0, -1.0, 0.0, 0.6, 1.1);
    let w: Vec<f64> = (0..4001).map(|k| -9.0 + 0.005 * k as f64).collect();
    let s = qubit_spectrum(&g, &w, 10).spectrum;
    let (center, _) = s.peak();
    Ok(all(vec![within(center, 1.1, 0.0025), within(s.fwhm().unwrap_or(f64::NAN), 1.2, 1e-3)]))
}

fn s21_scale_zero() -> Outcome {
    let g = coeffs_from(5.0, -1.0, 0.5, 0.6, 0.0);
    let w: Vec<f64> = (0..50).map(|k| k as f64 * 0.3 - 7.0).collect();
    Ok((s21_model(&w, &g, 0.0, 0.125).iter().all(|v| *v == 0.125), String::new()))
}

fn s21_linear() -> Outcome {
    let g = coeffs_from(5.0, -1.0, 0.5, 0.6, 0.0);
    let w: Vec<f64> = (0..50).map(|k| k as f64 * 0.3 - 7.0).collect();
    let (a, b) = (s21_model(&w, &g, 2.5, 0.5), s21_model(&w, &g, 1.0, 0.0));
    let e = (0..w.len()).map(|k| (a[k] - (2.5 * b[k] + 0.5)).abs()).fold(0.0, f64::max);
    Ok((e <= 1e-13, format!("{e:.1e}")))
}

fn two_tone_far_detuned() -> Outcome {
    let p = SystemParams::desk().with_drive(TAU * 0.1);
    let det = [TAU * 200.0, TAU * 300.0];
    let tr = SweepTruncation { fock_phonon: 6, fock_cavity: 2, phonon_cap: 20 };
    let c = two_tone_sweep(&p, &det, &Variant::Simplified, &tr)?;
    let m = c.values.iter().cloned().fold(0.0, f64::max);
    Ok((m <= 1e-3, format!("max population {m:.1e}")))
}

fn two_tone_uncoupled() -> Outcome {
    let mut p = SystemParams::desk().with_drive(TAU * 0.1);
    p.g_qb = 0.0;
    let det: Vec<f64> = (0..121).map(|k| TAU * (-3.0 + 0.05 * k as f64)).collect();
    let tr = SweepTruncation { fock_phonon: 6, fock_cavity: 2, phonon_cap: 20 };
    let c = two_tone_sweep(&p, &det, &Variant::Simplified, &tr)?;
    let t = transparency_fwhm(&c);
    Ok((matches!(t, Transparency::NotResolvable { .. }), format!("{t:?}")))
}

fn g2_coherent() -> Outcome {
    Ok(within(g2_zero(&one_slot(40, SlotState::Coherent(C64::new(1.0, 1.0)))?, 0)?, 1.0, 1e-6))
}

fn g2_fock_one() -> Outcome {
    let g = g2_zero(&one_slot(4, SlotState::Fock(1))?, 0)?;
    Ok((g == 0.0, format!("{g}")))
}

fn g2_thermal() -> Outcome {
    Ok(within(g2_zero(&one_slot(150, SlotState::Thermal(2.0))?, 0)?, 2.0, 1e-6))
}

fn grid(r: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| -r + 2.0 * r * k as f64 / (n - 1) as f64).collect()
}

fn wigner_vacuum() -> Outcome {
    let g = grid(5.0, 101);
    let m = wigner(&one_slot(3, SlotState::Fock(0))?, 0, &g, &g)?;
    Ok(within(m.at(50, 50), 1.0 / std::f64::consts::PI, 1e-15))
}

fn wigner_coherent() -> Outcome {
    let a = C64::new(0.8, -1.1);
    let g = grid(8.0, 161);
    let m = wigner(&one_slot(40, SlotState::Coherent(a))?, 0, &g, &g)?;
    let (x0, p0) = (2f64.sqrt() * a.re, 2f64.sqrt() * a.im);
    let mut worst = 0.0f64;
    for (i, &x) in m.x.iter().enumerate() {
        for (j, &p) in m.p.iter().enumerate() {
            let w = (-(x - x0).powi(2) - (p - p0).powi(2)).exp() / std::f64::consts::PI;
            worst = worst.max((m.at(i, j) - w).abs());
        }
    }
    Ok((worst <= 1e-10, format!("{worst:.1e}")))
}

fn decay_exponential() -> Outcome {
    let t: Vec<f64> = (0..3000).map(|k| k as f64 * 0.01).collect();
    let y: Vec<f64> = t.iter().map(|v| (-v / 2.2).exp()).collect();
    let d = decay_time(&t, &y, 0.0, DecayMethod::EFold)?;
    Ok(all(vec![within(d.tau / 2.2, 1.0, 0.01), (!d.non_exponential, format!("shape {:.1e}", d.shape_metric))]))
}

fn decay_linear() -> Outcome {
    let t: Vec<f64> = (0..1000).map(|k| k as f64 * 0.01).collect();
    let y: Vec<f64> = t.iter().map(|v| (1.0 - v / 9.0).max(1e-6)).collect();
    let d = decay_time(&t, &y, 0.0, DecayMethod::EFold)?;
    Ok((d.non_exponential, format!("shape {:.3}", d.shape_metric)))
}

fn phase_vacuum() -> Outcome {
    Ok((phase_of(c(0.0)).is_err(), String::new()))
}

fn shift_uncoupled() -> Outcome {
    let mut p = SystemParams::desk();
    p.g_qb = 0.0;
    let det: Vec<f64> = (0..41).map(|k| p.gamma_b * (-2.0 + 0.1 * k as f64)).collect();
    let s = phonon_shift_probe(&p, &[0.01, 0.4], &det, 6, 20)?;
    let worst = s.fits.iter().map(|f| f.center.abs()).fold(s.shifts[1].abs(), f64::max);
    let err = s.fits.iter().map(|f| f.std_errors[0]).fold(0.0, f64::max);
    Ok((worst <= err.max(1e-9 * p.gamma_b), format!("|centre| {worst:.1e}, fit error {err:.1e}")))
}

fn registry() -> Vec<(&'static str, fn() -> Outcome)> {
    vec![
        ("structural invariants (trace, hermiticity, positivity, steady residual)", structural),
        ("space dimensions", space_dims),
        ("two-level lowering operator", destroy_two_level),
        ("lowering operator on |4>", destroy_on_four),
        ("embedded identity", embed_identity),
        ("embedded sigma_z block structure", embed_sigma_z),
        ("operators on different slots commute", embed_commute),
        ("<identity> = 1", expectation_identity),
        ("<n> of a coherent state", expectation_number_coherent),
        ("<sigma_z> of the ground state", expectation_sigma_z_ground),
        ("vacuum product state", vacuum_product),
        ("coherent(2) occupation", coherent_two),
        ("thermal populations", thermal_one),
        ("partial trace of a product state", ptrace_product),
        ("partial trace of a Bell state", ptrace_bell),
        ("qubit decay rate from the Liouvillian", qubit_decay_rate),
        ("vacuum is stationary", vacuum_stationary),
        ("superoperator dimension", superop_dimension),
        ("free qubit decay", free_decay_trace),
        ("vacuum Rabi oscillation", jaynes_cummings_rabi),
        ("vacuum Rabi period", rabi_period),
        ("undriven simplified model relaxes to vacuum", || undriven_is_vacuum(Variant::Simplified)),
        ("undriven full model relaxes to vacuum", || undriven_is_vacuum(Variant::Full)),
        ("two-level saturation", saturation),
        ("bare qubit emission line", bare_qubit_line),
        ("Jaynes-Cummings matrix elements", jc_matrix_element),
        ("uncoupled Hamiltonian is free", free_subsystems),
        ("pointer states without probe", pointer_zero_probe),
        ("pointer states at large kappa", pointer_large_kappa),
        ("effective model without probe", effective_without_probe),
        ("two-level Kerr model", kerr_two_levels),
        ("transmon ladder", transmon_ladder),
        ("drive calibration", calibration),
        ("mean-field dark state", mf_dark),
        ("mean-field drive kick", mf_kick),
        ("mean-field uncoupled saturation", mf_uncoupled_saturation),
        ("mean-field steady state at zero drive", mf_zero_drive),
        ("mean-field uncoupled phonon", mf_uncoupled_population),
        ("decoupled population at zero drive", decoupled_zero),
        ("seeded linewidth of a bare phonon", seeded_bare_linewidth),
        ("spectrum coefficients without probe", gambetta_no_probe),
        ("|A| = D_ss", gambetta_modulus),
        ("bare qubit absorption line", gambetta_bare_line),
        ("S21 model at zero scale", s21_scale_zero),
        ("S21 model linearity", s21_linear),
        ("two-tone far from resonance", two_tone_far_detuned),
        ("two-tone without coupling has no dip", two_tone_uncoupled),
        ("g2 of a coherent state", g2_coherent),
        ("g2 of Fock 1", g2_fock_one),
        ("g2 of a thermal state", g2_thermal),
        ("Wigner function of the vacuum", wigner_vacuum),
        ("Wigner function of a coherent state", wigner_coherent),
        ("exponential decay time", decay_exponential),
        ("linear decay flagged", decay_linear),
        ("phase of the vacuum", phase_vacuum),
        ("uncoupled phonon line unshifted", shift_uncoupled),
    ]
}

/// Run every check (in parallel); results keep registry order.
pub fn run_suite() -> Vec<Check> {
    registry()
        .into_par_iter()
        .map(|(name, f)| match f() {
            Ok((passed, detail)) => Check { name, passed, detail },
            Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn suite_passes() {
        let r = super::run_suite();
        let failed: Vec<_> = r.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }
}
