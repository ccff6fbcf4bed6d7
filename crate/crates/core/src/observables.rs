//! State diagnostics and protocol simulations: g²(0), Wigner maps, gated
//! ringdown, decay-time estimates, phonon phase and the phonon-drive probe.

use crate::error::{Error, Result};
use crate::fit::{fit_lorentzian, levenberg_marquardt, LorentzianFit, LsqOptions};
use crate::lindblad::{evolve, EvolveOptions, TimeTrace};
use crate::models::{
    adaptive_steady_state, build, phonon_drive_model, ModelRealization, SystemParams, Variant, PHONON, TAIL_TOL,
};
use crate::quantum::{self, ground_state, partial_trace, DensityMatrix, Operator};
use crate::C64;
use rayon::prelude::*;

/// Mean occupation below which g²(0) is undefined.
pub const G2_FLOOR: f64 = 1e-12;

/// ⟨a†a†aa⟩/⟨a†a⟩² for the mode in `slot`.
pub fn g2_zero(state: &DensityMatrix, slot: usize) -> Result<f64> {
    let a = quantum::destroy(state.space(), slot)?;
    let ad = a.dagger();
    let n = quantum::expectation(&(&ad * &a), state)?.re;
    if n <= G2_FLOOR {
        return Err(Error::Undefined(format!("g2(0) of a mode with <n> = {n:.1e}")));
    }
    let pair = quantum::expectation(&(&(&ad * &ad) * &(&a * &a)), state)?.re;
    Ok(pair / (n * n))
}

/// Phonon g²(0) of a model state in the lab frame (undoes any displacement).
pub fn phonon_g2(m: &ModelRealization, state: &DensityMatrix) -> Result<f64> {
    let n = m.phonon_number(state);
    if n <= G2_FLOOR {
        return Err(Error::Undefined(format!("g2(0) of a mode with <n> = {n:.1e}")));
    }
    Ok(m.phonon_pair_number(state) / (n * n))
}

#[derive(Clone, Debug)]
pub struct WignerMap {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// w[i][j] = W(x[i], p[j])
    pub w: Vec<Vec<f64>>,
    /// Trapezoid estimate of ∫∫ W dx dp.
    pub normalization: f64,
}

impl WignerMap {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.w[i][j]
    }

    /// Grid point of largest W.
    pub fn peak(&self) -> (f64, f64, f64) {
        let mut best = (self.x[0], self.p[0], f64::MIN);
        for (i, row) in self.w.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.2 {
                    best = (self.x[i], self.p[j], v);
                }
            }
        }
        best
    }
}

fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let l = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
            let r = if i + 1 < n { x[i + 1] - x[i] } else { 0.0 };
            (l + r) / 2.0
        })
        .collect()
}

/// Wigner function of one ladder slot, x = (a + a†)/√2, p = −i(a − a†)/√2,
/// normalised so ∫∫ W dx dp = 1.
///
/// Uses the Fock-basis recursion for the Wigner functions of |m⟩⟨n|, which
/// is equivalent to evaluating the displaced parity at every grid point.
/// Fails if the grid does not reach |α| ≥ 1.5√⟨n⟩ + 3 or if more than 1e-3
/// of the quasi-probability falls outside it.
pub fn wigner(state: &DensityMatrix, slot: usize, x: &[f64], p: &[f64]) -> Result<WignerMap> {
    if x.len() < 2 || p.len() < 2 {
        return Err(Error::InvalidArgument("Wigner grid needs at least two points per axis".into()));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) || p.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("Wigner grid must be increasing".into()));
    }
    let rho = if state.space().n_slots() == 1 { state.clone() } else { partial_trace(state, &[slot])? };
    let rho = rho.matrix();
    let d = rho.nrows();
    let n_mean: f64 = (0..d).map(|k| k as f64 * rho[(k, k)].re).sum();
    let need = 1.5 * n_mean.max(0.0).sqrt() + 3.0;
    let reach = [x[0].abs(), x[x.len() - 1].abs(), p[0].abs(), p[p.len() - 1].abs()]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        / 2f64.sqrt();
    if reach < need {
        return Err(Error::Truncation(format!(
            "Wigner grid reaches |alpha| = {reach:.2} but the state needs {need:.2}"
        )));
    }
    let sqrt: Vec<f64> = (0..d).map(|k| (k as f64).sqrt()).collect();
    let w: Vec<Vec<f64>> = x
        .par_iter()
        .map(|&xi| {
            let mut wl = vec![C64::new(0.0, 0.0); d];
            p.iter()
                .map(|&pj| {
                    let a = C64::new(xi, pj) / 2f64.sqrt();
                    let two_a = a * 2.0;
                    let two_ac = two_a.conj();
                    wl[0] = C64::new((-2.0 * a.norm_sqr()).exp() / std::f64::consts::PI, 0.0);
                    let mut s = rho[(0, 0)].re * wl[0].re;
                    for n in 1..d {
                        wl[n] = two_a * wl[n - 1] / sqrt[n];
                        s += 2.0 * (rho[(0, n)] * wl[n]).re;
                    }
                    for m in 1..d {
                        let mut temp = wl[m];
                        wl[m] = (two_ac * temp - wl[m - 1] * sqrt[m]) / sqrt[m];
                        s += (rho[(m, m)] * wl[m]).re;
                        for n in m + 1..d {
                            let t2 = (two_a * wl[n - 1] - temp * sqrt[m]) / sqrt[n];
                            temp = wl[n];
                            wl[n] = t2;
                            s += 2.0 * (rho[(m, n)] * wl[n]).re;
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    let (wx, wp) = (trapezoid_weights(x), trapezoid_weights(p));
    let normalization: f64 =
        w.iter().zip(&wx).map(|(row, a)| a * row.iter().zip(&wp).map(|(v, b)| v * b).sum::<f64>()).sum();
    if (1.0 - normalization).abs() > 1e-3 {
        return Err(Error::Truncation(format!(
            "Wigner grid holds {normalization:.5} of the quasi-probability (tail above 1e-3)"
        )));
    }
    Ok(WignerMap { x: x.to_vec(), p: p.to_vec(), w, normalization })
}

/// arg ⟨b⟩ in (−π, π].
pub fn phase_of(b: C64) -> Result<f64> {
    if b.norm() <= 1e-9 {
        return Err(Error::Undefined(format!("phase of an amplitude of {:.1e}", b.norm())));
    }
    Ok(b.arg())
}

pub fn phonon_phase(m: &ModelRealization, state: &DensityMatrix) -> Result<f64> {
    phase_of(m.phonon_amplitude(state))
}

#[derive(Clone, Debug)]
pub struct RingdownOptions {
    pub t_on: f64,
    pub t_off: f64,
    pub dt: f64,
    pub fock_phonon: usize,
    pub fock_cap: usize,
    pub fock_cavity: usize,
    pub evolve: EvolveOptions,
}

impl Default for RingdownOptions {
    fn default() -> Self {
        RingdownOptions {
            t_on: 175.0,
            t_off: 75.0,
            dt: 0.05,
            fock_phonon: 20,
            fock_cap: 150,
            fock_cavity: 6,
            evolve: EvolveOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RingdownResult {
    /// Labels "qubit" (σ+σ−) and "phonon" (b†b).
    pub trace: TimeTrace,
    pub t_on: f64,
    pub fock_phonon: usize,
    /// Largest top-five-level phonon population seen along the trace.
    pub max_tail: f64,
    pub warnings: Vec<String>,
}

impl RingdownResult {
    pub fn qubit(&self) -> Vec<f64> {
        self.trace.series("qubit").unwrap()
    }

    pub fn phonon(&self) -> Vec<f64> {
        self.trace.series("phonon").unwrap()
    }

    /// Index of the first sample at or after switch-off.
    pub fn switch_off_index(&self) -> usize {
        self.trace.times.iter().position(|&t| t >= self.t_on - 1e-9).unwrap_or(0)
    }
}

fn top_levels_projector(m: &ModelRealization, count: usize) -> Result<Operator> {
    let d = m.fock_phonon();
    let proj = nalgebra::DMatrix::from_fn(d, d, |i, j| {
        if i == j && i + count >= d {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    quantum::embed_dense(proj, &m.space, PHONON)
}

fn ringdown_at(p: &SystemParams, variant: &Variant, n: usize, o: &RingdownOptions) -> Result<(RingdownResult, f64)> {
    let on = build(p, variant, n, o.fock_cavity)?;
    let off = build(&p.with_drive(0.0), variant, n, o.fock_cavity)?;
    let b = on.phonon_destroy();
    let nb = &b.dagger() * &b;
    let sq = on.qubit_excitation();
    let tail = top_levels_projector(&on, 5)?;
    let obs = [("qubit", &sq), ("phonon", &nb), ("tail", &tail)];
    let steps_on = (o.t_on / o.dt).round() as usize;
    let steps_off = (o.t_off / o.dt).round() as usize;
    let t1: Vec<f64> = (0..=steps_on).map(|k| k as f64 * o.dt).collect();
    let first = evolve(&on.liouvillian()?, &ground_state(&on.space), &t1, &obs, &o.evolve)?;
    let t2: Vec<f64> = (0..=steps_off).map(|k| k as f64 * o.dt).collect();
    let second = evolve(&off.liouvillian()?, &first.final_state, &t2, &obs, &o.evolve)?;
    let mut trace = first.trace;
    let mut shifted = second.trace;
    let t_on = *trace.times.last().unwrap();
    shifted.times.iter_mut().for_each(|t| *t += t_on);
    trace.append(&shifted);
    let max_tail = trace.series("tail").unwrap().into_iter().fold(0.0, f64::max);
    trace.labels.truncate(2);
    trace.values.truncate(2);
    Ok((RingdownResult { trace, t_on, fock_phonon: n, max_tail, warnings: vec![] }, max_tail))
}

/// Drive on from the vacuum for `t_on`, then off for `t_off`, sampling qubit
/// and phonon populations every `dt`. The phonon cut-off grows by 25% until
/// the top five levels stay below [`TAIL_TOL`] along the whole trace.
pub fn ringdown_protocol(p: &SystemParams, variant: &Variant, o: &RingdownOptions) -> Result<RingdownResult> {
    if !(o.t_on > 0.0 && o.t_off > 0.0 && o.dt > 0.0) {
        return Err(Error::InvalidArgument("ringdown windows and step must be positive".into()));
    }
    let mut n = o.fock_phonon.max(6);
    loop {
        let (mut r, tail) = ringdown_at(p, variant, n, o)?;
        if tail < TAIL_TOL {
            if p.gamma_b > 0.0 && o.t_on < 5.0 / p.gamma_b {
                r.warnings.push(format!(
                    "drive-on window {:.3} us is shorter than 5/gamma_b = {:.3} us",
                    o.t_on,
                    5.0 / p.gamma_b
                ));
            }
            return Ok(r);
        }
        if n >= o.fock_cap {
            return Err(Error::Truncation(format!(
                "phonon tail {tail:.2e} above {TAIL_TOL:.0e} during ringdown at the cap of {} levels",
                o.fock_cap
            )));
        }
        n = ((n as f64 * 1.25).ceil() as usize).min(o.fock_cap);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayMethod {
    EFold,
    ExpFit,
}

/// Log-linearity RMS above which a decay counts as non-exponential.
pub const SHAPE_THRESHOLD: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct DecayEstimate {
    pub tau: f64,
    /// RMS deviation of ln p from its straight-line fit over the first two
    /// e-folds, divided by the log span of 2.
    pub shape_metric: f64,
    pub non_exponential: bool,
}

fn last_crossing(t: &[f64], y: &[f64], level: f64) -> Option<f64> {
    (1..y.len()).rev().find(|&k| y[k - 1] >= level && y[k] < level).map(|k| {
        let f = (y[k - 1] - level) / (y[k - 1] - y[k]);
        t[k - 1] + f * (t[k] - t[k - 1])
    })
}

fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Decay time of `values` after time `t0`, measured from t0.
///
/// The e-fold time is the last downward crossing of p(t0)/e; the fit
/// alternative is a single exponential over the first two e-folds.
pub fn decay_time(times: &[f64], values: &[f64], t0: f64, method: DecayMethod) -> Result<DecayEstimate> {
    let start = times
        .iter()
        .position(|&t| t >= t0 - 1e-12)
        .ok_or_else(|| Error::InvalidArgument("switch-off time beyond the trace".into()))?;
    let t: Vec<f64> = times[start..].iter().map(|v| v - times[start]).collect();
    let y = &values[start..];
    let p0 = y[0];
    if !(p0 > 0.0) {
        return Err(Error::InvalidArgument("trace is not positive at switch-off".into()));
    }
    let e = std::f64::consts::E;
    let t_e = last_crossing(&t, y, p0 / e)
        .ok_or_else(|| Error::NoConvergence { iterations: t.len(), residual: y[y.len() - 1] / p0 })?;
    // the window for the shape metric ends at the last e² crossing, or at the
    // end of the trace if the decay does not get that far
    let t_e2 = last_crossing(&t, y, p0 / (e * e)).unwrap_or(t[t.len() - 1]);
    let (wx, wy): (Vec<f64>, Vec<f64>) =
        t.iter().zip(y).filter(|(ti, yi)| **ti <= t_e2 && **yi > 0.0).map(|(a, b)| (*a, b.ln())).unzip();
    if wx.len() < 3 {
        return Err(Error::InvalidArgument("fewer than three samples within the decay window".into()));
    }
    let (c, s) = line_fit(&wx, &wy);
    let rms = (wx.iter().zip(&wy).map(|(a, b)| (c + s * a - b).powi(2)).sum::<f64>() / wx.len() as f64).sqrt();
    let shape_metric = rms / 2.0;
    let tau = match method {
        DecayMethod::EFold => t_e,
        DecayMethod::ExpFit => {
            let tau0 = if s < 0.0 { -1.0 / s } else { t_e };
            let (fx, fy): (Vec<f64>, Vec<f64>) =
                t.iter().zip(y).filter(|(ti, _)| **ti <= t_e2).map(|(a, b)| (*a, *b)).unzip();
            let r = levenberg_marquardt(
                |q: &[f64]| fx.iter().zip(&fy).map(|(ti, yi)| q[0] * (-ti / (q[1] * tau0)).exp() - yi / p0).collect(),
                &[c.exp() / p0, 1.0],
                &LsqOptions::default(),
            )?;
            r.params[1] * tau0
        }
    };
    Ok(DecayEstimate { tau, shape_metric, non_exponential: shape_metric > SHAPE_THRESHOLD })
}

#[derive(Clone, Debug)]
pub struct ShiftCurve {
    pub eps_b: Vec<f64>,
    pub detunings: Vec<f64>,
    /// populations[k][j]: ⟨b†b⟩ at eps_b[k], detunings[j]
    pub populations: Vec<Vec<f64>>,
    pub fits: Vec<LorentzianFit>,
    /// Fitted centre minus the centre at the weakest drive.
    pub shifts: Vec<f64>,
    pub peak_population: Vec<f64>,
}

/// Steady ⟨b†b⟩ under a direct phonon drive ε_b as its detuning is swept,
/// with the qubit drive off and the qubit–phonon offset held fixed. The
/// Lorentzian centre at each ε_b gives the drive-dependent (inherited
/// anharmonic) frequency shift relative to the weakest drive.
pub fn phonon_shift_probe(
    p: &SystemParams,
    eps_b: &[f64],
    detunings: &[f64],
    fock_phonon: usize,
    fock_cap: usize,
) -> Result<ShiftCurve> {
    if eps_b.is_empty() || detunings.len() < 5 {
        return Err(Error::InvalidArgument("need at least one drive and five detunings".into()));
    }
    let base = p.with_drive(0.0);
    let mut populations = Vec::with_capacity(eps_b.len());
    for &e in eps_b {
        let row: Result<Vec<f64>> = detunings
            .par_iter()
            .enumerate()
            .map(|(k, &d)| {
                let pk = base.with_drive_detuning(d);
                let sol = adaptive_steady_state(|n| phonon_drive_model(&pk, e, n), fock_phonon, fock_cap)
                    .map_err(|err| Error::at(k, d, err))?;
                Ok(sol.realization.phonon_number(&sol.state))
            })
            .collect();
        populations.push(row?);
    }
    let fits: Vec<LorentzianFit> = populations.iter().map(|row| fit_lorentzian(detunings, row)).collect::<Result<_>>()?;
    let c0 = fits[0].center;
    Ok(ShiftCurve {
        eps_b: eps_b.to_vec(),
        detunings: detunings.to_vec(),
        shifts: fits.iter().map(|f| f.center - c0).collect(),
        peak_population: populations.iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).collect(),
        populations,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{make_space, make_state, SlotState};
    use crate::TAU;

    fn single(d: usize, s: SlotState) -> DensityMatrix {
        make_state(&make_space(&[d]).unwrap(), &[s]).unwrap()
    }

    #[test]
    fn g2_reference_states() {
        assert!((g2_zero(&single(40, SlotState::Coherent(C64::new(1.2, 0.7))), 0).unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(g2_zero(&single(5, SlotState::Fock(1)), 0).unwrap(), 0.0);
        for n in 2..6 {
            let g = g2_zero(&single(8, SlotState::Fock(n)), 0).unwrap();
            assert!((g - (1.0 - 1.0 / n as f64)).abs() < 1e-9);
        }
        assert!((g2_zero(&single(120, SlotState::Thermal(1.5)), 0).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn g2_of_vacuum_is_undefined() {
        assert!(matches!(g2_zero(&single(4, SlotState::Fock(0)), 0), Err(Error::Undefined(_))));
    }

    fn grid(r: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| -r + 2.0 * r * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn vacuum_wigner() {
        let g = grid(5.0, 101);
        let m = wigner(&single(3, SlotState::Fock(0)), 0, &g, &g).unwrap();
        assert!((m.at(50, 50) - 1.0 / std::f64::consts::PI).abs() < 1e-14);
        assert!((m.normalization - 1.0).abs() < 1e-6);
    }

    #[test]
    fn coherent_wigner_is_displaced_gaussian() {
        let alpha = C64::new(1.0, -0.5);
        let g = grid(7.0, 141);
        let m = wigner(&single(40, SlotState::Coherent(alpha)), 0, &g, &g).unwrap();
        let (x0, p0) = (2f64.sqrt() * alpha.re, 2f64.sqrt() * alpha.im);
        for (i, &x) in m.x.iter().enumerate().step_by(7) {
            for (j, &p) in m.p.iter().enumerate().step_by(7) {
                let exact = (-(x - x0).powi(2) - (p - p0).powi(2)).exp() / std::f64::consts::PI;
                assert!((m.at(i, j) - exact).abs() < 1e-10, "{x} {p}");
            }
        }
    }

    #[test]
    fn fock_one_wigner_negative_at_origin() {
        let g = grid(7.0, 141);
        let m = wigner(&single(4, SlotState::Fock(1)), 0, &g, &g).unwrap();
        assert!((m.at(70, 70) + 1.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn small_grid_rejected() {
        let g = grid(3.0, 41);
        let r = wigner(&single(60, SlotState::Coherent(C64::new(3.0, 0.0))), 0, &g, &g);
        assert!(matches!(r, Err(Error::Truncation(_))));
    }

    #[test]
    fn wigner_of_reduced_state() {
        let s = make_space(&[2, 20]).unwrap();
        let rho = make_state(&s, &[SlotState::Fock(1), SlotState::Coherent(C64::new(0.0, 1.0))]).unwrap();
        let g = grid(8.0, 161);
        let m = wigner(&rho, 1, &g, &g).unwrap();
        let (x, p, _) = m.peak();
        assert!(x.abs() < 0.1 && (p - 2f64.sqrt()).abs() < 0.1);
    }

    #[test]
    fn phase_of_vacuum_is_undefined() {
        assert!(matches!(phase_of(C64::new(0.0, 0.0)), Err(Error::Undefined(_))));
        assert!((phase_of(C64::new(-1.0, 0.0)).unwrap() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn exponential_decay_time() {
        let t: Vec<f64> = (0..2000).map(|k| k as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|&v| if v < 5.0 { 0.8 } else { 0.8 * (-(v - 5.0) / 1.7).exp() }).collect();
        for m in [DecayMethod::EFold, DecayMethod::ExpFit] {
            let d = decay_time(&t, &y, 5.0, m).unwrap();
            assert!((d.tau / 1.7 - 1.0).abs() < 0.01, "{m:?}: {}", d.tau);
            assert!(d.shape_metric < 1e-6);
            assert!(!d.non_exponential);
        }
    }

    #[test]
    fn linear_ramp_is_non_exponential() {
        let t: Vec<f64> = (0..1000).map(|k| k as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|&v| (1.0 - v / 9.0).max(1e-6)).collect();
        let d = decay_time(&t, &y, 0.0, DecayMethod::EFold).unwrap();
        assert!(d.non_exponential, "{}", d.shape_metric);
    }

    #[test]
    fn no_decay_is_an_error() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        assert!(decay_time(&t, &[1.0; 10], 0.0, DecayMethod::EFold).is_err());
    }

    #[test]
    fn undriven_ringdown_stays_empty() {
        let p = SystemParams::desk();
        let o = RingdownOptions { t_on: 1.0, t_off: 1.0, dt: 0.1, fock_phonon: 6, ..Default::default() };
        let r = ringdown_protocol(&p, &Variant::Simplified, &o).unwrap();
        assert!(r.qubit().iter().chain(r.phonon().iter()).all(|v| v.abs() <= 1e-10));
        assert_eq!(r.trace.times.len(), 21);
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn detuned_ringdown_decays_at_qubit_rate() {
        let mut p = SystemParams::desk().with_drive(TAU * 1.0);
        p.g_qb = 0.0;
        let o = RingdownOptions { t_on: 2.0, t_off: 2.0, dt: 0.01, fock_phonon: 6, ..Default::default() };
        let r = ringdown_protocol(&p, &Variant::Simplified, &o).unwrap();
        let d = decay_time(&r.trace.times, &r.qubit(), r.t_on, DecayMethod::ExpFit).unwrap();
        assert!((d.tau * p.gamma_1 - 1.0).abs() < 0.01, "{}", d.tau * p.gamma_1);
        assert!(r.phonon().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn bare_phonon_line_is_unshifted() {
        let mut p = SystemParams::desk();
        p.g_qb = 0.0;
        let det: Vec<f64> = (0..41).map(|k| p.gamma_b * (-2.0 + 0.1 * k as f64)).collect();
        let c = phonon_shift_probe(&p, &[0.01, 0.5], &det, 6, 20).unwrap();
        for f in &c.fits {
            assert!(f.center.abs() < 1e-6 * p.gamma_b);
            assert!((f.fwhm / p.gamma_b - 1.0).abs() < 1e-6);
        }
        assert!(c.shifts[1].abs() < 1e-6 * p.gamma_b);
        let beta = 0.5 / (p.gamma_b / 2.0);
        assert!((c.peak_population[1] / (beta * beta) - 1.0).abs() < 1e-9);
    }
}
