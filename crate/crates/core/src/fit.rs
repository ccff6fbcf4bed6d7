//! Levenberg–Marquardt least squares and the Lorentzian lineshape fit.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct LsqResult {
    pub params: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub residual_norm: f64,
    /// Σr² / (m − p)
    pub reduced_chi2: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct LsqOptions {
    pub max_iter: usize,
    pub xtol: f64,
    pub ftol: f64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        LsqOptions { max_iter: 500, xtol: 1e-12, ftol: 1e-14 }
    }
}

fn jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x: &[f64], r0: &[f64]) -> DMatrix<f64> {
    let m = r0.len();
    let n = x.len();
    let mut j = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for k in 0..n {
        let h = 1e-7 * x[k].abs().max(1e-7);
        xp[k] = x[k] + h;
        let rp = f(&xp);
        xp[k] = x[k] - h;
        let rm = f(&xp);
        xp[k] = x[k];
        for i in 0..m {
            j[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    j
}

fn ssq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimise Σ r(x)² starting from `x0`.
pub fn levenberg_marquardt<F>(f: F, x0: &[f64], opts: &LsqOptions) -> Result<LsqResult>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let m = r.len();
    if m < n {
        return Err(Error::FitFailed(format!("{m} residuals for {n} parameters")));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitFailed("non-finite residual at the starting point".into()));
    }
    let mut cost = ssq(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        let j = jacobian(&f, &x, &r);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-30);
            }
            let step = match a.clone().cholesky() {
                Some(c) => c.solve(&(-&g)),
                None => match a.lu().solve(&(-&g)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                },
            };
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rn = f(&xn);
            let cn = ssq(&rn);
            if cn.is_finite() && cn <= cost {
                let small_step = step.norm() <= opts.xtol * (DVector::from_column_slice(&x).norm() + opts.xtol);
                let small_gain = cost - cn <= opts.ftol * cost;
                x = xn;
                r = rn;
                cost = cn;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                if small_step || small_gain {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            // no downhill step at any damping: a minimum to working precision
            converged = true;
        }
        if converged {
            break;
        }
    }
    let j = jacobian(&f, &x, &r);
    let jtj = j.transpose() * &j;
    let dof = (m - n).max(1) as f64;
    let red = cost / dof;
    let cov = jtj.clone().try_inverse().unwrap_or_else(|| DMatrix::from_element(n, n, f64::NAN)) * red;
    let std_errors = (0..n).map(|k| cov[(k, k)].abs().sqrt()).collect();
    Ok(LsqResult {
        params: x,
        std_errors,
        covariance: cov,
        residual_norm: cost.sqrt(),
        reduced_chi2: red,
        iterations: it,
        converged,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LorentzianFit {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// Standard errors in the order center, fwhm, amplitude, offset.
    pub std_errors: [f64; 4],
    pub residual_norm: f64,
}

pub fn lorentzian(x: f64, center: f64, fwhm: f64, amplitude: f64, offset: f64) -> f64 {
    let h = fwhm / 2.0;
    amplitude * h * h / ((x - center).powi(2) + h * h) + offset
}

/// Fit A(f/2)²/((x−c)² + (f/2)²) + C, started from the peak and its
/// half-power points.
pub fn fit_lorentzian(x: &[f64], y: &[f64]) -> Result<LorentzianFit> {
    if x.len() != y.len() || x.len() < 5 {
        return Err(Error::FitFailed("need at least five points".into()));
    }
    let k = crate::lindblad::argmax(y);
    let base = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let amp0 = y[k] - base;
    let shifted: Vec<f64> = y.iter().map(|v| v - base).collect();
    let span = x[x.len() - 1] - x[0];
    let w0 = crate::lindblad::half_width(x, &shifted).unwrap_or(span / 4.0).max(span * 1e-6);
    // scale parameters to O(1) for conditioning
    let (xs, ys) = (w0, amp0.abs().max(1e-300));
    let model = |p: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(y)
            .map(|(&xi, &yi)| (lorentzian(xi, p[0] * xs, p[1] * xs, p[2] * ys, p[3] * ys) - yi) / ys)
            .collect()
    };
    let p0 = [x[k] / xs, 1.0, 1.0, base / ys];
    let r = levenberg_marquardt(model, &p0, &LsqOptions::default())?;
    if !r.converged {
        return Err(Error::FitFailed("Lorentzian fit did not converge".into()));
    }
    let p = &r.params;
    let fwhm = (p[1] * xs).abs();
    if !(fwhm > 0.0) || !fwhm.is_finite() {
        return Err(Error::FitFailed("non-positive width".into()));
    }
    let e = &r.std_errors;
    Ok(LorentzianFit {
        center: p[0] * xs,
        fwhm,
        amplitude: p[2] * ys,
        offset: p[3] * ys,
        std_errors: [e[0] * xs, e[1] * xs, e[2] * ys, e[3] * ys],
        residual_norm: r.residual_norm * ys,
    })
}
