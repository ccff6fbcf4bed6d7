//! Semiclassical (factorised) dynamics of ⟨b⟩, ⟨σ−⟩, ⟨σz⟩ with the cavity
//! eliminated, its steady states and the phonon linewidth.

use crate::error::{Error, Result};
use crate::fit::{fit_lorentzian, LorentzianFit};
use crate::lindblad::{Dopri, EvolveOptions};
use crate::models::{cavity_induced, SystemParams};
use crate::{C64, TAU};
use nalgebra::{Matrix3, Vector3};
use rustfft::FftPlanner;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanFieldState {
    pub b: C64,
    pub s_minus: C64,
    pub s_z: f64,
}

impl MeanFieldState {
    pub const GROUND: MeanFieldState =
        MeanFieldState { b: C64::new(0.0, 0.0), s_minus: C64::new(0.0, 0.0), s_z: -1.0 };

    pub fn norm(&self) -> f64 {
        (self.b.norm_sqr() + self.s_minus.norm_sqr() + self.s_z * self.s_z).sqrt()
    }

    fn pack(&self) -> Vec<C64> {
        vec![self.b, self.s_minus, C64::new(self.s_z, 0.0)]
    }

    fn unpack(v: &[C64]) -> Self {
        MeanFieldState { b: v[0], s_minus: v[1], s_z: v[2].re }
    }
}

/// Rates entering the mean-field equations. `eps` carries the drive phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MfInputs {
    pub delta_b: f64,
    pub delta_q_tilde: f64,
    pub gamma_b: f64,
    pub gamma_2_tilde: f64,
    pub gamma_1: f64,
    pub g_qb: f64,
    pub eps: C64,
}

impl MfInputs {
    /// γ̃₂ = Γ₁/2 + Γ_φ + Γ_φ,cav and Δ̃_q = Δ_q − ω_q,cav; γ₁ is Γ₁.
    pub fn from_params(p: &SystemParams) -> MfInputs {
        let (_, _, shift, dephase) = cavity_induced(p);
        MfInputs {
            delta_b: p.delta_b,
            delta_q_tilde: p.delta_q - shift,
            gamma_b: p.gamma_b,
            gamma_2_tilde: p.gamma_1 / 2.0 + p.gamma_phi + dephase,
            gamma_1: p.gamma_1,
            g_qb: p.g_qb,
            eps: p.drive(),
        }
    }

    pub fn with_eps(&self, eps: C64) -> MfInputs {
        MfInputs { eps, ..*self }
    }
}

pub fn mf_derivative(s: &MeanFieldState, p: &MfInputs) -> MeanFieldState {
    let g = p.g_qb;
    let x = g * s.b + p.eps;
    let db = C64::new(-p.gamma_b / 2.0, p.delta_b) * s.b - I * g * s.s_minus;
    let ds = C64::new(-p.gamma_2_tilde, p.delta_q_tilde) * s.s_minus + I * x * s.s_z;
    let dz = 2.0 * I * s.s_minus * x.conj() - 2.0 * I * s.s_minus.conj() * x - p.gamma_1 * (s.s_z + 1.0);
    MeanFieldState { b: db, s_minus: ds, s_z: dz.re }
}

/// Uniformly sampled trajectory from `init` (default: ground state).
pub fn mf_evolve(
    p: &MfInputs,
    t_final: f64,
    samples: usize,
    init: Option<MeanFieldState>,
) -> Result<(Vec<f64>, Vec<MeanFieldState>)> {
    if !(t_final > 0.0) || samples < 2 {
        return Err(Error::InvalidArgument("need t_final > 0 and at least two samples".into()));
    }
    let times: Vec<f64> = (0..samples).map(|k| t_final * k as f64 / (samples - 1) as f64).collect();
    let traj = mf_evolve_on(p, &times, init.unwrap_or(MeanFieldState::GROUND))?;
    Ok((times, traj))
}

pub fn mf_evolve_on(p: &MfInputs, times: &[f64], init: MeanFieldState) -> Result<Vec<MeanFieldState>> {
    let f = |y: &[C64], dy: &mut [C64]| {
        let d = mf_derivative(&MeanFieldState::unpack(y), p);
        dy[0] = d.b;
        dy[1] = d.s_minus;
        dy[2] = C64::new(d.s_z, 0.0);
    };
    let opts = EvolveOptions { rel_tol: 1e-10, abs_tol: 1e-12, ..Default::default() };
    let mut ig = Dopri::new(f, 3, opts);
    let mut y = init.pack();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &ts in times {
        ig.advance(&mut y, &mut t, ts)?;
        out.push(MeanFieldState::unpack(&y));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveParams {
    pub gamma_eff: f64,
    pub delta_eff: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MfSteady {
    pub b: C64,
    pub s_minus: C64,
    pub s_z: f64,
    pub n_b: f64,
    pub effective: EffectiveParams,
    pub residual: f64,
}

impl MfSteady {
    pub fn state(&self) -> MeanFieldState {
        MeanFieldState { b: self.b, s_minus: self.s_minus, s_z: self.s_z }
    }
}

/// s̄z = −γ₁/(γ₁ + 4γ̃₂|X|²/(Δ̃² + γ̃₂²)) for an effective qubit drive X.
pub fn sz_of_drive(p: &MfInputs, x: C64) -> f64 {
    let d = p.delta_q_tilde.powi(2) + p.gamma_2_tilde.powi(2);
    -p.gamma_1 / (p.gamma_1 + 4.0 * p.gamma_2_tilde / d * x.norm_sqr())
}

/// b̄ = g ε s̄z / [(iΔ̃ − γ̃₂)(iΔ_b − γ_b/2) − g² s̄z].
pub fn b_of_sz(p: &MfInputs, s_z: f64) -> C64 {
    let g = p.g_qb;
    let den = C64::new(-p.gamma_2_tilde, p.delta_q_tilde) * C64::new(-p.gamma_b / 2.0, p.delta_b) - g * g * s_z;
    g * p.eps * s_z / den
}

/// Steady σ− for given b and s_z.
pub fn s_minus_of(p: &MfInputs, b: C64, s_z: f64) -> C64 {
    -I * s_z * (p.g_qb * b + p.eps) / C64::new(-p.gamma_2_tilde, p.delta_q_tilde)
}

/// Closed-form n̄_b as a function of s̄z (squared modulus of [`b_of_sz`]).
pub fn n_b_closed_form(p: &MfInputs, s_z: f64) -> f64 {
    let g = p.g_qb;
    let (db, dq, gb, g2) = (p.delta_b, p.delta_q_tilde, p.gamma_b, p.gamma_2_tilde);
    let num = g * g * p.eps.norm_sqr() * s_z * s_z;
    let a = db * g2 + dq * gb / 2.0;
    let c = gb * g2 / 2.0 - db * dq - g * g * s_z;
    num / (a * a + c * c)
}

pub fn effective_params(p: &MfInputs, s_z: f64) -> EffectiveParams {
    EffectiveParams { gamma_eff: 2.0 * p.gamma_2_tilde / (-s_z), delta_eff: p.delta_q_tilde / (-s_z) }
}

/// n̄_b written through the effective decay and detuning.
pub fn n_b_effective_form(p: &MfInputs, e: &EffectiveParams) -> f64 {
    let g = p.g_qb;
    let (db, gb) = (p.delta_b, p.gamma_b);
    let a = db * e.gamma_eff / 2.0 + e.delta_eff * gb / 2.0;
    let c = gb * e.gamma_eff / 4.0 - db * e.delta_eff + g * g;
    g * g * p.eps.norm_sqr() / (a * a + c * c)
}

#[derive(Clone, Debug)]
pub struct MfSolverOptions {
    pub continuation_steps: usize,
    pub mixing: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for MfSolverOptions {
    fn default() -> Self {
        MfSolverOptions { continuation_steps: 40, mixing: 0.5, max_iter: 20_000, tol: 1e-10 }
    }
}

fn fixed_point_residual(p: &MfInputs, b: C64, s_z: f64) -> Vector3<f64> {
    let bn = b_of_sz(p, s_z);
    let zn = sz_of_drive(p, p.g_qb * b + p.eps);
    Vector3::new(b.re - bn.re, b.im - bn.im, s_z - zn)
}

/// Solve at one drive, starting from `b0`.
fn solve_from(p: &MfInputs, b0: C64, o: &MfSolverOptions) -> Result<(C64, f64)> {
    let mut b = b0;
    let mut s_z = sz_of_drive(p, p.g_qb * b + p.eps);
    let mut res = f64::INFINITY;
    for _ in 0..o.max_iter {
        s_z = sz_of_drive(p, p.g_qb * b + p.eps);
        let bn = b_of_sz(p, s_z);
        let step = (bn - b).norm();
        b = b * (1.0 - o.mixing) + bn * o.mixing;
        res = step;
        if step <= 1e-13 * (1.0 + b.norm()) {
            break;
        }
    }
    // Newton polish on (Re b, Im b, s_z)
    let mut x = Vector3::new(b.re, b.im, s_z);
    for _ in 0..50 {
        let f = fixed_point_residual(p, C64::new(x[0], x[1]), x[2]);
        if f.norm() <= 1e-15 * (1.0 + x.norm()) {
            break;
        }
        let mut j = Matrix3::zeros();
        for k in 0..3 {
            let h = 1e-7 * x[k].abs().max(1e-7);
            let mut xp = x;
            xp[k] += h;
            let mut xm = x;
            xm[k] -= h;
            let col = (fixed_point_residual(p, C64::new(xp[0], xp[1]), xp[2])
                - fixed_point_residual(p, C64::new(xm[0], xm[1]), xm[2]))
                / (2.0 * h);
            j.set_column(k, &col);
        }
        match j.lu().solve(&(-f)) {
            Some(dx) => x += dx,
            None => break,
        }
    }
    let fin = fixed_point_residual(p, C64::new(x[0], x[1]), x[2]).norm();
    if !fin.is_finite() || fin > 1e-9 * (1.0 + x.norm()) {
        return Err(Error::NoConvergence { iterations: o.max_iter, residual: fin.min(res) });
    }
    Ok((C64::new(x[0], x[1]), x[2]))
}

fn finish(p: &MfInputs, b: C64, s_z: f64, tol: f64) -> Result<MfSteady> {
    let s_minus = s_minus_of(p, b, s_z);
    let st = MeanFieldState { b, s_minus, s_z };
    let residual = mf_derivative(&st, p).norm();
    if !(residual <= tol * (1.0 + b.norm())) {
        return Err(Error::NoConvergence { iterations: 0, residual });
    }
    Ok(MfSteady { b, s_minus, s_z, n_b: b.norm_sqr(), effective: effective_params(p, s_z), residual })
}

/// Steady state on the branch continuous from zero drive.
pub fn mf_steady_state(p: &MfInputs) -> Result<MfSteady> {
    mf_steady_state_with(p, &MfSolverOptions::default())
}

pub fn mf_steady_state_with(p: &MfInputs, o: &MfSolverOptions) -> Result<MfSteady> {
    if !(p.gamma_b > 0.0 && p.gamma_2_tilde > 0.0) {
        return Err(Error::InvalidArgument("mean-field steady state needs gamma_b, gamma_2 > 0".into()));
    }
    let mut b = C64::new(0.0, 0.0);
    let steps = o.continuation_steps.max(1);
    for k in 1..=steps {
        let frac = k as f64 / steps as f64;
        let pk = p.with_eps(p.eps * frac);
        b = solve_from(&pk, b, o)?.0;
    }
    let (b, s_z) = solve_from(p, b, o)?;
    finish(p, b, s_z, o.tol)
}

/// Sweep following one branch: each drive seeds the next.
pub fn mf_sweep(p: &MfInputs, eps_values: &[f64]) -> Result<Vec<MfSteady>> {
    let phase = if p.eps.norm() > 0.0 { p.eps / p.eps.norm() } else { C64::new(1.0, 0.0) };
    let o = MfSolverOptions::default();
    let mut out = Vec::with_capacity(eps_values.len());
    let mut prev_eps = 0.0;
    let mut b = C64::new(0.0, 0.0);
    for &e in eps_values {
        // refine the continuation between consecutive sweep points
        let sub = 8;
        for k in 1..=sub {
            let ek = prev_eps + (e - prev_eps) * k as f64 / sub as f64;
            b = solve_from(&p.with_eps(phase * ek), b, &o)?.0;
        }
        let pe = p.with_eps(phase * e);
        let (bb, s_z) = solve_from(&pe, b, &o)?;
        b = bb;
        out.push(finish(&pe, b, s_z, o.tol)?);
        prev_eps = e;
    }
    Ok(out)
}

/// n̄_b with the effective decay and detuning evaluated at g = 0 (|ε|² in
/// place of |g b̄ + ε|²), the coupling kept everywhere else.
pub fn decoupled_population(p: &MfInputs) -> Result<f64> {
    if !(p.gamma_b > 0.0 && p.gamma_2_tilde > 0.0) {
        return Err(Error::InvalidArgument("needs gamma_b, gamma_2 > 0".into()));
    }
    let s_z = sz_of_drive(p, p.eps);
    Ok(n_b_effective_form(p, &effective_params(p, s_z)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinewidthProtocol {
    /// Integrate from (0, 0, −1) and analyse b(t) − b̄.
    RingUp,
    /// Start at the fixed point with b scaled by (1 + fraction).
    Seeded { fraction: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    Rectangular,
    Hann,
}

#[derive(Clone, Debug)]
pub struct LinewidthOptions {
    pub protocol: LinewidthProtocol,
    pub window: Window,
    /// Record length in µs; default 40/γ_b.
    pub t_window: Option<f64>,
    pub samples: usize,
    pub zero_pad: usize,
    /// Fit range around the peak, in units of the half-power width estimate.
    pub fit_span: f64,
}

impl Default for LinewidthOptions {
    fn default() -> Self {
        LinewidthOptions {
            protocol: LinewidthProtocol::RingUp,
            window: Window::Rectangular,
            t_window: None,
            samples: 1 << 14,
            zero_pad: 4,
            fit_span: 5.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LinewidthResult {
    pub fit: LorentzianFit,
    pub fwhm_hz: f64,
    pub omega: Vec<f64>,
    pub power: Vec<f64>,
    pub steady: MfSteady,
    pub protocol: LinewidthProtocol,
}

/// Power spectrum |FFT(b(t) − b̄)|² of the transient and a Lorentzian fit
/// around its dominant peak.
pub fn phonon_linewidth(p: &MfInputs, o: &LinewidthOptions) -> Result<LinewidthResult> {
    let steady = mf_steady_state(p)?;
    let t_win = o.t_window.unwrap_or(40.0 / p.gamma_b);
    let n = o.samples;
    let dt = t_win / n as f64;
    let init = match o.protocol {
        LinewidthProtocol::RingUp => MeanFieldState::GROUND,
        LinewidthProtocol::Seeded { fraction } => {
            let mut s = steady.state();
            s.b = if steady.b.norm() > 0.0 { s.b * (1.0 + fraction) } else { C64::new(fraction, 0.0) };
            s
        }
    };
    let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    let traj = mf_evolve_on(p, &times, init)?;
    let m = n * o.zero_pad.max(1);
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for (k, s) in traj.iter().enumerate() {
        let w = match o.window {
            Window::Rectangular => 1.0,
            Window::Hann => 0.5 - 0.5 * (TAU * k as f64 / (n - 1) as f64).cos(),
        };
        buf[k] = (s.b - steady.b) * w * dt;
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    // reorder to increasing frequency; x(t) ∝ e^{iωt} peaks at +ω
    let dw = TAU / (m as f64 * dt);
    let half = m / 2;
    let mut omega = Vec::with_capacity(m);
    let mut power = Vec::with_capacity(m);
    for j in 0..m {
        let k = (j + half) % m;
        let kk = k as isize - if k >= half { m as isize } else { 0 };
        // forward FFT uses e^{−iωt}, so x ∝ e^{iΩt} lands at bin +Ω
        omega.push(kk as f64 * dw);
        power.push(buf[k].norm_sqr());
    }
    let kp = crate::lindblad::argmax(&power);
    let est = crate::lindblad::half_width(&omega, &power).unwrap_or(4.0 * dw).max(4.0 * dw);
    let span = o.fit_span * est;
    let lo = omega.partition_point(|&w| w < omega[kp] - span);
    let hi = omega.partition_point(|&w| w <= omega[kp] + span);
    if lo == 0 || hi >= omega.len() || kp < 2 || kp + 2 >= omega.len() {
        return Err(Error::FitFailed("spectral peak at the edge of the frequency window".into()));
    }
    let fit = fit_lorentzian(&omega[lo..hi], &power[lo..hi])?;
    Ok(LinewidthResult { fwhm_hz: fit.fwhm / TAU * 1e6, fit, omega, power, steady, protocol: o.protocol })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk(eps: f64) -> MfInputs {
        MfInputs::from_params(&SystemParams::desk().with_drive(eps))
    }

    fn device(eps: f64) -> MfInputs {
        MfInputs::from_params(&SystemParams::default().with_drive(eps))
    }

    #[test]
    fn dark_fixed_point() {
        let d = mf_derivative(&MeanFieldState::GROUND, &desk(0.0));
        assert_eq!(d.norm(), 0.0);
    }

    #[test]
    fn drive_on_ground_state() {
        let e = 1.7;
        let d = mf_derivative(&MeanFieldState::GROUND, &desk(e));
        assert_eq!(d.b, C64::new(0.0, 0.0));
        assert!((d.s_minus - C64::new(0.0, -e)).norm() < 1e-15);
        assert_eq!(d.s_z, 0.0);
    }

    #[test]
    fn derivative_matches_independent_scalar_code() {
        let p = MfInputs { eps: C64::from_polar(1.3, 0.4), delta_b: 0.2, delta_q_tilde: -0.7, ..device(0.0) };
        let s = MeanFieldState { b: C64::new(0.3, -1.1), s_minus: C64::new(-0.2, 0.15), s_z: -0.4 };
        // real-component form, written out by hand
        let (br, bi, sr, si, z) = (s.b.re, s.b.im, s.s_minus.re, s.s_minus.im, s.s_z);
        let (er, ei) = (p.eps.re, p.eps.im);
        let g = p.g_qb;
        let dbr = -p.gamma_b / 2.0 * br - p.delta_b * bi + g * si;
        let dbi = -p.gamma_b / 2.0 * bi + p.delta_b * br - g * sr;
        let xr = g * br + er;
        let xi = g * bi + ei;
        let dsr = -p.gamma_2_tilde * sr - p.delta_q_tilde * si - xi * z;
        let dsi = -p.gamma_2_tilde * si + p.delta_q_tilde * sr + xr * z;
        // 2i s X* − 2i s* X = −4 Im(s X*)
        let dz = -4.0 * (si * xr - sr * xi) - p.gamma_1 * (z + 1.0);
        let d = mf_derivative(&s, &p);
        assert!((d.b - C64::new(dbr, dbi)).norm() < 1e-12);
        assert!((d.s_minus - C64::new(dsr, dsi)).norm() < 1e-12);
        assert!((d.s_z - dz).abs() < 1e-12);
    }

    #[test]
    fn undriven_trajectory_stays_dark() {
        let (_, tr) = mf_evolve(&desk(0.0), 5.0, 11, None).unwrap();
        assert!(tr.iter().all(|s| s.norm() == 1.0 && s.s_z == -1.0));
    }

    #[test]
    fn uncoupled_qubit_saturates() {
        let p = MfInputs { g_qb: 0.0, ..desk(2.0) };
        let (_, tr) = mf_evolve(&p, 10.0, 3, None).unwrap();
        let z = tr.last().unwrap().s_z;
        let d = p.delta_q_tilde.powi(2) + p.gamma_2_tilde.powi(2);
        let expect = -p.gamma_1 / (p.gamma_1 + 4.0 * p.gamma_2_tilde * 4.0 / d);
        assert!((z - expect).abs() < 1e-8);
    }

    #[test]
    fn steady_state_identities() {
        for e in [0.3, 2.0, 7.98, 20.0] {
            let p = desk(e);
            let s = mf_steady_state(&p).unwrap();
            assert!(s.residual <= 1e-10 * (1.0 + s.b.norm()));
            assert!((-1.0..=0.0).contains(&s.s_z));
            assert!((s.n_b - n_b_closed_form(&p, s.s_z)).abs() <= 1e-10 * s.n_b.max(1.0));
            assert!((n_b_effective_form(&p, &s.effective) - n_b_closed_form(&p, s.s_z)).abs() <= 1e-10 * s.n_b.max(1.0));
            assert!(s.effective.gamma_eff >= 2.0 * p.gamma_2_tilde);
        }
    }

    #[test]
    fn zero_drive_and_zero_coupling() {
        let s = mf_steady_state(&desk(0.0)).unwrap();
        assert_eq!(s.n_b, 0.0);
        assert_eq!(s.s_z, -1.0);
        assert!((s.effective.gamma_eff - 2.0 * desk(0.0).gamma_2_tilde).abs() < 1e-15);
        let p = MfInputs { g_qb: 0.0, ..desk(3.0) };
        assert_eq!(mf_steady_state(&p).unwrap().n_b, 0.0);
        assert_eq!(decoupled_population(&desk(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn late_time_matches_steady_state() {
        let p = desk(TAU * 0.5);
        let s = mf_steady_state(&p).unwrap();
        let (_, tr) = mf_evolve(&p, 60.0 / p.gamma_b, 2, None).unwrap();
        let nb = tr.last().unwrap().b.norm_sqr();
        assert!((nb - s.n_b).abs() <= 1e-6 * s.n_b, "{nb} vs {}", s.n_b);
    }

    #[test]
    fn decoupled_curve_is_non_monotonic() {
        let p = device(0.0);
        let eps: Vec<f64> = (1..=80).map(|k| TAU * 0.25 * k as f64).collect();
        let n: Vec<f64> = eps.iter().map(|&e| decoupled_population(&p.with_eps(C64::new(e, 0.0))).unwrap()).collect();
        let k = crate::lindblad::argmax(&n);
        assert!(k > 0 && k < n.len() - 1);
        assert!(n[n.len() - 1] < 0.5 * n[k]);
    }

    #[test]
    fn uncoupled_phonon_rings_down_at_its_own_rate() {
        let p = MfInputs { g_qb: 0.0, ..device(0.0) };
        let o = LinewidthOptions { protocol: LinewidthProtocol::Seeded { fraction: 0.01 }, ..Default::default() };
        let r = phonon_linewidth(&p, &o).unwrap();
        assert!((r.fit.fwhm / p.gamma_b - 1.0).abs() < 0.02, "{}", r.fit.fwhm / p.gamma_b);
    }

    #[test]
    fn phase_covariance() {
        let p = desk(TAU * 0.6);
        let a = mf_steady_state(&p).unwrap();
        let q = p.with_eps(p.eps * C64::from_polar(1.0, 0.785));
        let b = mf_steady_state(&q).unwrap();
        let d = (b.b.arg() - a.b.arg() - 0.785).rem_euclid(TAU);
        assert!(d.min(TAU - d) < 1e-9);
    }
}
