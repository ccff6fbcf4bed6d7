//! Liouvillian construction, time evolution, steady states and
//! regression-theorem spectra.

use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, HilbertSpace, Operator};
use crate::sparse::{norm2, BandLu, Csr};
use crate::C64;
use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug)]
pub struct Liouvillian {
    space: HilbertSpace,
    superop: Csr,
    collapses: Vec<(Operator, f64)>,
}

/// `dρ/dt = L ρ` for column-major vectorised ρ:
/// L = −i(I⊗H − Hᵀ⊗I) + Σ γ[(C̄⊗C) − ½ I⊗C†C − ½ (C†C)ᵀ⊗I].
pub fn build_liouvillian(h: &Operator, collapses: &[(Operator, f64)]) -> Result<Liouvillian> {
    let herm = h.hermiticity_error();
    if herm > 1e-12 {
        return Err(Error::NotHermitian(herm));
    }
    let space = h.space().clone();
    let n = space.total_dim();
    let id = Csr::identity(n);
    let hs = h.to_csr();
    let mut l = id.kron(&hs).add_scaled(&hs.transpose().kron(&id), C64::new(-1.0, 0.0)).scale(-I);
    for (c, rate) in collapses {
        if !(*rate >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative collapse rate {rate}")));
        }
        if c.space() != &space {
            return Err(Error::InvalidArgument("collapse operator on a different space".into()));
        }
        if *rate == 0.0 {
            continue;
        }
        let cs = c.to_csr();
        let cdc = cs.adjoint().matmul(&cs);
        let d = cs
            .conj()
            .kron(&cs)
            .add_scaled(&id.kron(&cdc), C64::new(-0.5, 0.0))
            .add_scaled(&cdc.transpose().kron(&id), C64::new(-0.5, 0.0));
        l = l.add_scaled(&d, C64::new(*rate, 0.0));
    }
    Ok(Liouvillian { space, superop: l, collapses: collapses.to_vec() })
}

impl Liouvillian {
    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn superop(&self) -> &Csr {
        &self.superop
    }

    pub fn collapses(&self) -> &[(Operator, f64)] {
        &self.collapses
    }

    pub fn dim(&self) -> usize {
        self.superop.nrows
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let v = self.superop.matvec(&rho.to_vec());
        DensityMatrix::from_vec(&self.space, &v).unwrap()
    }

    /// ‖L† vec(I)‖: zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let n = self.space.total_dim();
        let mut col = vec![ZERO; self.dim()];
        for (i, j, v) in self.superop.iter() {
            // row i of L contributes to the adjoint through the identity entries
            if i % (n + 1) == 0 {
                col[j] += v.conj();
            }
        }
        norm2(&col)
    }

    /// Relative residual ‖Lρ‖ / (‖L‖‖ρ‖).
    pub fn residual(&self, rho: &DensityMatrix) -> f64 {
        let v = rho.to_vec();
        let r = self.superop.matvec(&v);
        norm2(&r) / (self.superop.norm_inf() * norm2(&v)).max(f64::MIN_POSITIVE)
    }
}

/// Linear functional v ↦ tr(A·mat(v)).
fn trace_functional(a: &Operator) -> Vec<(usize, C64)> {
    let n = a.space().total_dim();
    // tr(A X) = Σ A_ij X_ji, and X_ji sits at j + n·i
    a.to_csr().iter().map(|(i, j, v)| (j + n * i, v)).collect()
}

fn apply_functional(f: &[(usize, C64)], v: &[C64]) -> C64 {
    f.iter().map(|&(k, w)| w * v[k]).sum()
}

fn vec_trace(v: &[C64], n: usize) -> C64 {
    (0..n).map(|i| v[i * (n + 1)]).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeTrace {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// values[k][t] for observable k
    pub values: Vec<Vec<C64>>,
}

impl TimeTrace {
    pub fn series(&self, label: &str) -> Option<Vec<f64>> {
        let k = self.labels.iter().position(|l| l == label)?;
        Some(self.values[k].iter().map(|z| z.re).collect())
    }

    /// Concatenate, dropping a duplicated join time.
    pub fn append(&mut self, other: &TimeTrace) {
        assert_eq!(self.labels, other.labels);
        let skip = match (self.times.last(), other.times.first()) {
            (Some(a), Some(b)) if (a - b).abs() <= 1e-12 * a.abs().max(1.0) => 1,
            _ => 0,
        };
        self.times.extend_from_slice(&other.times[skip..]);
        for (v, w) in self.values.iter_mut().zip(&other.values) {
            v.extend_from_slice(&w[skip..]);
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { rel_tol: 1e-8, abs_tol: 1e-10, max_steps: 50_000_000 }
    }
}

pub struct Evolution {
    pub trace: TimeTrace,
    pub final_state: DensityMatrix,
    pub steps: usize,
}

// Dormand–Prince 5(4) tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive Dormand–Prince integrator for a linear complex system `y' = f(y)`.
pub struct Dopri<F: Fn(&[C64], &mut [C64])> {
    f: F,
    n: usize,
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    opts: EvolveOptions,
    h: f64,
    pub steps: usize,
}

impl<F: Fn(&[C64], &mut [C64])> Dopri<F> {
    pub fn new(f: F, n: usize, opts: EvolveOptions) -> Self {
        let z = || vec![ZERO; n];
        Dopri { f, n, k: [z(), z(), z(), z(), z(), z(), z()], tmp: z(), opts, h: 0.0, steps: 0 }
    }

    fn stage(&mut self, y: &[C64], h: f64, coeffs: &[(usize, f64)], out: usize) {
        for i in 0..self.n {
            let mut s = y[i];
            for &(j, a) in coeffs {
                s += self.k[j][i] * (a * h);
            }
            self.tmp[i] = s;
        }
        let (tmp, k) = (&self.tmp, &mut self.k[out]);
        (self.f)(tmp, k);
    }

    /// Advance `y` from `t` to `t_end`.
    pub fn advance(&mut self, y: &mut Vec<C64>, t: &mut f64, t_end: f64) -> Result<()> {
        if t_end <= *t {
            return Ok(());
        }
        if self.h == 0.0 {
            (self.f)(y, &mut self.k[0]);
            let d0 = norm2(y).max(1e-5);
            let d1 = norm2(&self.k[0]).max(1e-300);
            self.h = (0.01 * d0 / d1).min(t_end - *t);
        } else {
            let (y0, k0) = (&*y, &mut self.k[0]);
            (self.f)(y0, k0);
        }
        let mut ynew = vec![ZERO; self.n];
        while *t < t_end {
            if self.steps >= self.opts.max_steps {
                return Err(Error::StepUnderflow { t: *t });
            }
            let remaining = t_end - *t;
            if remaining <= 1e-13 * t_end.abs().max(1.0) {
                *t = t_end;
                break;
            }
            if self.h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: *t });
            }
            let mut h = self.h.min(remaining);
            let last = h >= remaining;
            self.stage(y, h, &[(0, A21)], 1);
            self.stage(y, h, &[(0, A31), (1, A32)], 2);
            self.stage(y, h, &[(0, A41), (1, A42), (2, A43)], 3);
            self.stage(y, h, &[(0, A51), (1, A52), (2, A53), (3, A54)], 4);
            self.stage(y, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], 5);
            for i in 0..self.n {
                ynew[i] = y[i]
                    + (self.k[0][i] * A71
                        + self.k[2][i] * A73
                        + self.k[3][i] * A74
                        + self.k[4][i] * A75
                        + self.k[5][i] * A76)
                        * h;
            }
            {
                let (yn, k6) = (&ynew, &mut self.k[6]);
                (self.f)(yn, k6);
            }
            let mut err = 0.0;
            for i in 0..self.n {
                let e = (self.k[0][i] * E1
                    + self.k[2][i] * E3
                    + self.k[3][i] * E4
                    + self.k[4][i] * E5
                    + self.k[5][i] * E6
                    + self.k[6][i] * E7)
                    * h;
                let sc = self.opts.abs_tol + self.opts.rel_tol * y[i].norm().max(ynew[i].norm());
                err += (e.norm() / sc).powi(2);
            }
            let err = (err / self.n as f64).sqrt();
            self.steps += 1;
            if err <= 1.0 {
                *t = if last { t_end } else { *t + h };
                std::mem::swap(y, &mut ynew);
                self.k.swap(0, 6);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    self.h = h * fac;
                } else {
                    self.h = self.h.max(h * fac);
                }
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                self.h = h;
            }
        }
        Ok(())
    }
}

/// Integrate from `rho0`, sampling `observables` at `times` (which must be
/// increasing and start at or after 0, measured from `rho0`).
pub fn evolve(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    times: &[f64],
    observables: &[(&str, &Operator)],
    opts: &EvolveOptions,
) -> Result<Evolution> {
    if rho0.space() != l.space() {
        return Err(Error::InvalidArgument("initial state on a different space".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().map_or(false, |&t| t < 0.0) {
        return Err(Error::InvalidArgument("sample times must be increasing and non-negative".into()));
    }
    let n = l.space().total_dim();
    let funcs: Vec<Vec<(usize, C64)>> = observables.iter().map(|(_, o)| trace_functional(o)).collect();
    let sup = l.superop();
    let mut ig = Dopri::new(|x: &[C64], y: &mut [C64]| sup.matvec_into(x, y), n * n, opts.clone());
    let mut y = rho0.to_vec();
    let mut t = 0.0;
    let mut values = vec![Vec::with_capacity(times.len()); observables.len()];
    for &ts in times {
        ig.advance(&mut y, &mut t, ts)?;
        for (k, f) in funcs.iter().enumerate() {
            values[k].push(apply_functional(f, &y));
        }
    }
    let steps = ig.steps;
    let final_state = DensityMatrix::from_vec(l.space(), &y)?;
    Ok(Evolution {
        trace: TimeTrace {
            times: times.to_vec(),
            labels: observables.iter().map(|(s, _)| s.to_string()).collect(),
            values,
        },
        final_state,
        steps,
    })
}

pub const STEADY_TOL: f64 = 1e-10;

static STEADY_TOL_BITS: AtomicU64 = AtomicU64::new(0);

/// Override the residual tolerance of [`steady_state`] for the whole
/// process (a non-positive value restores [`STEADY_TOL`]).
pub fn set_steady_tolerance(tol: f64) {
    STEADY_TOL_BITS.store(if tol > 0.0 { tol.to_bits() } else { 0 }, Ordering::Relaxed);
}

pub fn steady_tolerance() -> f64 {
    match STEADY_TOL_BITS.load(Ordering::Relaxed) {
        0 => STEADY_TOL,
        b => f64::from_bits(b),
    }
}

/// Unique stationary state via a direct banded solve.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let n = l.space().total_dim();
    let sup = l.superop();
    let solve_with = |k: usize| -> Result<Vec<C64>> {
        let m = sup.with_unit_row(k);
        let lu = BandLu::factor(&m)?;
        let mut rhs = vec![ZERO; n * n];
        rhs[k] = C64::new(1.0, 0.0);
        let mut y = lu.solve(&rhs);
        for _ in 0..3 {
            let my = m.matvec(&y);
            let r: Vec<C64> = rhs.iter().zip(&my).map(|(a, b)| a - b).collect();
            if norm2(&r) <= 1e-15 * norm2(&y) {
                break;
            }
            let d = lu.solve(&r);
            y.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
        }
        Ok(y)
    };
    let mut y = solve_with(0)?;
    let diag: Vec<f64> = (0..n).map(|i| y[i * (n + 1)].re).collect();
    let tr = vec_trace(&y, n);
    if (1.0 / tr).norm() < 1e-6 {
        let best = (0..n).max_by(|&a, &b| diag[a].partial_cmp(&diag[b]).unwrap()).unwrap();
        y = solve_with(best * (n + 1))?;
    }
    let rho = DensityMatrix::from_vec(l.space(), &y)?.normalized();
    let res = l.residual(&rho);
    let tol = steady_tolerance();
    if !(res <= tol) {
        return Err(Error::Residual { residual: res, tol });
    }
    Ok(rho)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
}

impl Spectrum {
    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        self.omega
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1]))
            .sum()
    }

    pub fn peak(&self) -> (f64, f64) {
        let k = argmax(&self.values);
        (self.omega[k], self.values[k])
    }

    /// Full width at half maximum from linear interpolation of the outermost
    /// half-height crossings around the peak.
    pub fn fwhm(&self) -> Option<f64> {
        half_width(&self.omega, &self.values)
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold(0, |b, (i, x)| if *x > v[b] { i } else { b })
}

pub(crate) fn half_width(x: &[f64], y: &[f64]) -> Option<f64> {
    let k = argmax(y);
    let half = y[k] / 2.0;
    let mut lo = None;
    for i in (0..k).rev() {
        if y[i] < half {
            lo = Some(x[i] + (half - y[i]) / (y[i + 1] - y[i]) * (x[i + 1] - x[i]));
            break;
        }
    }
    let mut hi = None;
    for i in k + 1..y.len() {
        if y[i] < half {
            hi = Some(x[i - 1] + (y[i - 1] - half) / (y[i - 1] - y[i]) * (x[i] - x[i - 1]));
            break;
        }
    }
    Some(hi? - lo?)
}

/// S(ω) = (1/2π) ∫ dt e^{iωt} ⟨A(t) B(0)⟩ with the coherent part removed,
/// i.e. S = (1/π) Re tr(A x) where (L + iω) x = −(Bρ − ⟨B⟩ρ).
pub fn regression_spectrum(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    a: &Operator,
    b: &Operator,
    omegas: &[f64],
) -> Result<Spectrum> {
    if omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("frequency grid must be increasing".into()));
    }
    let res = l.residual(rho_ss);
    if res > 1e-8 {
        return Err(Error::Residual { residual: res, tol: 1e-8 });
    }
    let n = l.space().total_dim();
    let sup = l.superop();
    let rho = rho_ss.to_vec();
    let brho = (b.to_dense() * rho_ss.matrix()).as_slice().to_vec();
    let mean_b = vec_trace(&brho, n);
    let v: Vec<C64> = brho.iter().zip(&rho).map(|(x, r)| -(x - mean_b * r)).collect();
    let fa = trace_functional(a);
    let scale = sup.norm_inf();
    let perm = crate::sparse::rcm(&sup.shifted(C64::new(0.0, 1.0)));

    let values: Result<Vec<f64>> = omegas
        .par_iter()
        .map(|&w| {
            let x = if w.abs() < 1e-9 * scale {
                // on the null space: pin one diagonal entry, then project out ρ_ss
                let k = 0;
                let m = sup.with_unit_row(k);
                let mut rhs = v.clone();
                rhs[k] = ZERO;
                let xp = BandLu::factor_with_perm(&m, crate::sparse::rcm(&m))?.solve(&rhs);
                let t = vec_trace(&xp, n);
                xp.iter().zip(&rho).map(|(x, r)| x - t * r).collect::<Vec<_>>()
            } else {
                let m = sup.shifted(C64::new(0.0, w));
                BandLu::factor_with_perm(&m, perm.clone())?.solve(&v)
            };
            Ok(apply_functional(&fa, &x).re / std::f64::consts::PI)
        })
        .collect();
    Ok(Spectrum { omega: omegas.to_vec(), values: values? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::*;

    fn qubit_decay(gamma: f64) -> (HilbertSpace, Liouvillian) {
        let s = make_space(&[2]).unwrap();
        let h = Operator::zeros(&s);
        let l = build_liouvillian(&h, &[(sigma_minus(&s, 0).unwrap(), gamma)]).unwrap();
        (s, l)
    }

    #[test]
    fn superoperator_shape() {
        let s = make_space(&[2, 3]).unwrap();
        let l = build_liouvillian(&Operator::zeros(&s), &[]).unwrap();
        assert_eq!((l.superop().nrows, l.superop().ncols), (36, 36));
    }

    #[test]
    fn excited_population_rate() {
        let g1 = 2.3;
        let (s, l) = qubit_decay(g1);
        let rho = make_state(&s, &[SlotState::Fock(1)]).unwrap();
        let d = l.apply(&rho);
        let p = expectation(&(&sigma_plus(&s, 0).unwrap() * &sigma_minus(&s, 0).unwrap()), &d).unwrap();
        assert!((p.re + g1).abs() < 1e-14);
    }

    #[test]
    fn vacuum_is_stationary() {
        let s = make_space(&[8]).unwrap();
        let a = destroy(&s, 0).unwrap();
        let h = &(&a.dagger() * &a) * 0.7;
        let l = build_liouvillian(&h, &[(a.clone(), 1.3)]).unwrap();
        let d = l.apply(&ground_state(&s));
        assert!(d.matrix().norm() <= 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = make_space(&[3]).unwrap();
        let a = destroy(&s, 0).unwrap();
        assert!(matches!(build_liouvillian(&a, &[]), Err(Error::NotHermitian(_))));
        assert!(build_liouvillian(&Operator::zeros(&s), &[(a, -1.0)]).is_err());
    }

    #[test]
    fn trace_preserving() {
        let s = make_space(&[2, 4]).unwrap();
        let b = destroy(&s, 1).unwrap();
        let sm = sigma_minus(&s, 0).unwrap();
        let h = &(&(&b.dagger() * &sm) + &(&sm.dagger() * &b)) * 0.4;
        let h = &h + &(&(&sm + &sm.dagger()) * 1.1);
        let l = build_liouvillian(&h, &[(b, 0.2), (sm.clone(), 1.0), (sigma_z(&s, 0).unwrap(), 0.3)]).unwrap();
        assert!(l.trace_defect() < 1e-10);
    }

    #[test]
    fn free_decay_matches_exponential() {
        let g1 = 1.7;
        let (s, l) = qubit_decay(g1);
        let rho = make_state(&s, &[SlotState::Fock(1)]).unwrap();
        let pe = &sigma_plus(&s, 0).unwrap() * &sigma_minus(&s, 0).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.15).collect();
        let ev = evolve(&l, &rho, &times, &[("pe", &pe)], &EvolveOptions::default()).unwrap();
        for (t, v) in times.iter().zip(&ev.trace.values[0]) {
            let exact = (-g1 * t).exp();
            assert!((v.re - exact).abs() <= 1e-6 * exact, "t={t}");
        }
    }

    #[test]
    fn vacuum_rabi_oscillation() {
        let g = 0.9;
        let s = make_space(&[2, 4]).unwrap();
        let b = destroy(&s, 1).unwrap();
        let sm = sigma_minus(&s, 0).unwrap();
        let h = &(&(&b.dagger() * &sm) + &(&sm.dagger() * &b)) * g;
        let l = build_liouvillian(&h, &[]).unwrap();
        let rho = make_state(&s, &[SlotState::Fock(1), SlotState::Fock(0)]).unwrap();
        let pe = &sm.dagger() * &sm;
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1).collect();
        let ev = evolve(&l, &rho, &times, &[("pe", &pe)], &EvolveOptions::default()).unwrap();
        for (t, v) in times.iter().zip(&ev.trace.values[0]) {
            assert!((v.re - (g * t).cos().powi(2)).abs() < 1e-7);
        }
        assert!((ev.final_state.trace().re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn steady_state_of_driven_qubit() {
        // analytic: ⟨σz⟩ = −Γ²/(Γ² + 8Ω²) for H = Ω(σ+ + σ−) on resonance... with Ω the drive
        let s = make_space(&[2]).unwrap();
        let sm = sigma_minus(&s, 0).unwrap();
        let (g1, eps) = (1.0, 0.6);
        let h = &(&sm + &sm.dagger()) * eps;
        let l = build_liouvillian(&h, &[(sm, g1)]).unwrap();
        let rho = steady_state(&l).unwrap();
        let sz = expectation(&sigma_z(&s, 0).unwrap(), &rho).unwrap().re;
        let expect = -g1 * g1 / (g1 * g1 + 8.0 * eps * eps);
        assert!((sz - expect).abs() < 1e-12, "{sz} vs {expect}");
        assert!(l.residual(&rho) <= STEADY_TOL);
    }

    #[test]
    fn steady_state_undriven_is_vacuum() {
        let s = make_space(&[2, 5]).unwrap();
        let b = destroy(&s, 1).unwrap();
        let sm = sigma_minus(&s, 0).unwrap();
        let h = &(&(&b.dagger() * &sm) + &(&sm.dagger() * &b)) * 0.3;
        let l = build_liouvillian(&h, &[(b, 0.1), (sm, 1.0)]).unwrap();
        let rho = steady_state(&l).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_null_space_reported() {
        // two decoupled undamped levels: every diagonal state is stationary
        let s = make_space(&[3]).unwrap();
        let l = build_liouvillian(&Operator::zeros(&s), &[]).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::Singular { .. })));
    }

    #[test]
    fn bare_qubit_spectrum_is_lorentzian() {
        let (g1, dq) = (1.2, 0.8);
        let s = make_space(&[2]).unwrap();
        let sm = sigma_minus(&s, 0).unwrap();
        let h = &sigma_z(&s, 0).unwrap() * (-dq / 2.0);
        let l = build_liouvillian(&h, &[(sm.clone(), g1)]).unwrap();
        let rho = steady_state(&l).unwrap();
        let w: Vec<f64> = (0..2001).map(|k| -10.0 + k as f64 * 0.01).collect();
        let sp = regression_spectrum(&l, &rho, &sm, &sm.dagger(), &w).unwrap();
        let gq = g1 / 2.0;
        for (x, y) in w.iter().zip(&sp.values) {
            let lor = gq / std::f64::consts::PI / ((x + dq).powi(2) + gq * gq);
            assert!((y - lor).abs() < 1e-10);
        }
        let (c, _) = sp.peak();
        assert!((c + dq).abs() < 0.011);
        assert!((sp.fwhm().unwrap() - 2.0 * gq).abs() < 1e-3);
    }
}
