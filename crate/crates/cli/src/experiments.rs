//! One function per experiment. Each returns its tables and fills the
//! manifest; nothing here touches the filesystem except reading input data.

use crate::config::{parse_list, RunConfig};
use crate::output::{read_curve, Manifest, Table};
use cqad::meanfield::{decoupled_population, mf_sweep, phonon_linewidth, LinewidthOptions, MfInputs};
use cqad::models::{adaptive_steady_state, build, AdaptiveSolution, SystemParams, Variant, PHONON};
use cqad::observables::{
    decay_time, phonon_g2, phonon_phase, ringdown_protocol, wigner, DecayMethod, RingdownOptions,
};
use cqad::spectroscopy::{coeffs_from, fit_s21, s21_model, transparency_fwhm, Transparency, TwoToneCurve};
use cqad::{Error, C64, TAU};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::time::Instant;

#[derive(Debug)]
pub enum Failure {
    /// Bad or inconsistent input: exit code 1.
    Config(String),
    /// A solver or fit failed: exit code 2.
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e.to_string())
    }
}

type Out = Result<Vec<Table>, Failure>;

/// Which halves of the ringdown comparison to run.
#[derive(Debug, Clone, Copy)]
pub struct RingdownSelection {
    pub resonant: bool,
    pub detuned: bool,
}

const PAPER_GAMMA_B: f64 = TAU * 6.81e-3;
const DEFAULT_DRIVES: (f64, f64, usize) = (TAU * 0.1, TAU * 10.0, 21);

fn timed<T>(m: &mut Manifest, step: &str, f: impl FnOnce(&mut Manifest) -> T) -> T {
    let t0 = Instant::now();
    let r = f(m);
    m.timings.push((step.to_string(), t0.elapsed().as_secs_f64()));
    r
}

fn drive_list(c: &RunConfig) -> Vec<f64> {
    match &c.drive {
        Some(d) => d.amplitudes(c.params.delta_cal),
        None => {
            let (a, b, n) = DEFAULT_DRIVES;
            (0..n).map(|k| (a.ln() + (b.ln() - a.ln()) * k as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

fn single_drive(c: &RunConfig, what: &str) -> Result<f64, Failure> {
    match &c.drive {
        Some(d) if d.len() == 1 => Ok(d.amplitudes(c.params.delta_cal)[0]),
        Some(_) => Err(Failure::Config(format!("{what} takes a single drive value"))),
        None if c.params.eps_d > 0.0 => Ok(c.params.eps_d),
        None => Err(Failure::Config(format!("{what} needs a drive: set eps_d, drive_eps or drive_dbm"))),
    }
}

fn detunings(c: &RunConfig, default: &str) -> Vec<f64> {
    c.detuning_mhz.clone().unwrap_or_else(|| parse_list(default).unwrap()).iter().map(|d| TAU * d).collect()
}

struct Truncation {
    start: usize,
    cavity: usize,
    cap: usize,
}

fn truncation(c: &RunConfig, start: usize) -> Truncation {
    Truncation {
        start: c.fock_phonon.unwrap_or(start),
        cavity: c.fock_cavity.unwrap_or(6),
        cap: c.fock_cap.unwrap_or(150),
    }
}

/// Results in axis order, or the error at the lowest failing index (so the
/// report does not depend on thread scheduling).
fn first_error<T>(v: Vec<cqad::Result<T>>) -> cqad::Result<Vec<T>> {
    v.into_iter().collect()
}

/// Adaptive steady states at independent parameter points, in axis order.
fn solve_points(
    points: &[SystemParams],
    axis: &[f64],
    variant: &Variant,
    tr: &Truncation,
    label: &str,
    m: &mut Manifest,
) -> Result<Vec<AdaptiveSolution>, Failure> {
    let sols: Vec<cqad::Result<AdaptiveSolution>> = points
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            adaptive_steady_state(|n| build(p, variant, n, tr.cavity), tr.start, tr.cap)
                .map_err(|e| Error::at(k, axis[k], e))
        })
        .collect();
    let sols = first_error(sols).map_err(|e| Failure::Numeric(format!("{label}: {e}")))?;
    for (k, s) in sols.iter().enumerate() {
        m.truncation.push((format!("{label}[{k}]"), s.fock_phonon, s.tail));
    }
    Ok(sols)
}

fn two_tone_curve(
    p: &SystemParams,
    dets: &[f64],
    variant: &Variant,
    tr: &Truncation,
    label: &str,
    m: &mut Manifest,
) -> Result<TwoToneCurve, Failure> {
    let points: Vec<SystemParams> = dets.iter().map(|&d| p.with_drive_detuning(d)).collect();
    let sols = solve_points(&points, dets, variant, tr, label, m)?;
    let values = sols.iter().map(|s| s.realization.qubit_population(&s.state)).collect();
    Ok(TwoToneCurve::new(dets.iter().map(|d| p.omega_b + d).collect(), values, &format!("{variant} model"))?)
}

fn transparency_json(t: &Transparency, gamma_b: f64) -> Value {
    match t {
        Transparency::Resolved { center, fwhm, fwhm_hz, depth } => json!({
            "resolved": true, "center_rad_per_us": center, "fwhm_rad_per_us": fwhm,
            "fwhm_hz": fwhm_hz, "fwhm_over_gamma_b": fwhm / gamma_b, "depth": depth,
        }),
        Transparency::NotResolvable { depth } => json!({ "resolved": false, "depth": depth }),
    }
}

fn hz(omega: f64) -> f64 {
    omega / TAU * 1e6
}

pub fn two_tone(c: &RunConfig, m: &mut Manifest) -> Out {
    let eps = single_drive(c, "two-tone")?;
    let p = c.params.with_drive(eps);
    let dets = detunings(c, "linspace(-5, 5, 201)");
    let tr = truncation(c, 8);
    let curve = timed(m, "steady states", |m| two_tone_curve(&p, &dets, &c.variant, &tr, "two-tone", m))?;
    let t = timed(m, "transparency width", |_| transparency_fwhm(&curve));
    m.results.insert("transparency".into(), transparency_json(&t, p.gamma_b));
    let mut table = Table::new("two_tone.csv", &["freq_Hz", "value"]);
    table.meta("quantity", "steady-state qubit excitation vs drive frequency");
    table.meta("eps_d_rad_per_us", eps);
    for (w, v) in curve.omega.iter().zip(&curve.values) {
        table.push(vec![hz(*w), *v]);
    }
    Ok(vec![table])
}

pub fn sweep_power(c: &RunConfig, m: &mut Manifest) -> Out {
    let eps = drive_list(c);
    let tr = truncation(c, 20);
    let points: Vec<SystemParams> = eps.iter().map(|&e| c.params.with_drive(e)).collect();
    let sols = timed(m, "steady states", |m| solve_points(&points, &eps, &c.variant, &tr, "drive", m))?;
    let mut widths = vec![f64::NAN; eps.len()];
    if c.detuning_mhz.is_some() {
        let dets = detunings(c, "");
        let tr2 = truncation(c, 8);
        for (k, p) in points.iter().enumerate() {
            let curve = timed(m, &format!("two-tone at drive {k}"), |m| {
                two_tone_curve(p, &dets, &c.variant, &tr2, &format!("two-tone {k}"), m)
            })?;
            if let Transparency::Resolved { fwhm, .. } = transparency_fwhm(&curve) {
                widths[k] = fwhm / p.gamma_b;
            }
        }
    }
    let dbm = c.drive.as_ref().and_then(|d| d.dbm());
    let mut cols = vec!["eps_d_rad_per_us"];
    if dbm.is_some() {
        cols.push("power_dBm");
    }
    cols.extend(["n_b", "g2_zero", "qubit_excitation", "dip_fwhm_over_gamma_b"]);
    let mut table = Table::new("sweep_power.csv", &cols);
    table.meta("dip_width", if c.detuning_mhz.is_some() { "two-tone transparency FWHM" } else { "not computed (no detuning_mhz)" });
    let mut peak = (0.0, f64::MIN);
    for (k, s) in sols.iter().enumerate() {
        let r = &s.realization;
        let n_b = r.phonon_number(&s.state);
        if n_b > peak.1 {
            peak = (eps[k], n_b);
        }
        let g2 = phonon_g2(r, &s.state).unwrap_or(f64::NAN);
        let mut row = vec![eps[k]];
        if let Some(d) = dbm {
            row.push(d[k]);
        }
        row.extend([n_b, g2, r.qubit_population(&s.state), widths[k]]);
        table.push(row);
    }
    m.results.insert("peak".into(), json!({ "eps_d_rad_per_us": peak.0, "n_b": peak.1 }));
    Ok(vec![table])
}

pub fn ringdown(c: &RunConfig, sel: RingdownSelection, m: &mut Manifest) -> Out {
    let eps = single_drive(c, "ringdown")?;
    let p = c.params.with_drive(eps);
    let scale = if p.gamma_b > 0.0 { PAPER_GAMMA_B / p.gamma_b } else { 1.0 };
    let o = RingdownOptions {
        t_on: c.t_on.unwrap_or(175.0 * scale),
        t_off: c.t_off.unwrap_or(75.0 * scale),
        dt: c.dt.unwrap_or(0.05),
        fock_phonon: c.fock_phonon.unwrap_or(20),
        fock_cap: c.fock_cap.unwrap_or(150),
        fock_cavity: c.fock_cavity.unwrap_or(6),
        ..Default::default()
    };
    let mut runs = vec![];
    if sel.resonant {
        runs.push(("resonant", p.clone()));
    }
    if sel.detuned {
        runs.push(("detuned", p.with_drive_detuning(p.delta_b + TAU * c.detuned_mhz)));
    }
    let mut tables = vec![];
    for (label, pk) in runs {
        let r = timed(m, label, |_| ringdown_protocol(&pk, &c.variant, &o))
            .map_err(|e| Failure::Numeric(format!("{label} ringdown: {e}")))?;
        m.truncation.push((label.to_string(), r.fock_phonon, r.max_tail));
        m.warnings.extend(r.warnings.iter().map(|w| format!("{label}: {w}")));
        let phonon = r.phonon();
        let decay = decay_time(&r.trace.times, &phonon, r.t_on, DecayMethod::EFold);
        m.results.insert(
            label.into(),
            match &decay {
                Ok(d) => json!({ "tau_us": d.tau, "shape_metric": d.shape_metric, "non_exponential": d.non_exponential }),
                Err(e) => json!({ "tau_us": null, "error": e.to_string() }),
            },
        );
        let mut t = Table::new(&format!("ringdown_{label}.csv"), &["t_us", "qubit_pop", "phonon_pop"]);
        t.meta("run", label);
        t.meta("t_on_us", o.t_on);
        t.meta("t_off_us", o.t_off);
        t.meta("window_scale_gamma_b", scale);
        t.meta("delta_b_rad_per_us", pk.delta_b);
        for (k, (&tk, q)) in r.trace.times.iter().zip(r.qubit()).enumerate() {
            t.push(vec![tk, q, phonon[k]]);
        }
        tables.push(t);
    }
    Ok(tables)
}

fn mf_base(p: &SystemParams) -> (MfInputs, C64) {
    let inp = MfInputs::from_params(&p.with_drive(1.0));
    (inp, C64::from_polar(1.0, p.drive_phase))
}

pub fn meanfield_sweep(c: &RunConfig, m: &mut Manifest) -> Out {
    let eps = drive_list(c);
    let (inp, phase) = mf_base(&c.params);
    let sols = timed(m, "mean-field sweep", |_| mf_sweep(&inp, &eps))?;
    let mut t = Table::new(
        "meanfield_sweep.csv",
        &["eps_d_rad_per_us", "n_b", "s_z", "b_re", "b_im", "n_b_decoupled", "residual"],
    );
    for (k, s) in sols.iter().enumerate() {
        let dec = decoupled_population(&inp.with_eps(phase * eps[k])).map_err(|e| Error::at(k, eps[k], e))?;
        t.push(vec![eps[k], s.n_b, s.s_z, s.b.re, s.b.im, dec, s.residual]);
    }
    Ok(vec![t])
}

pub fn linewidth(c: &RunConfig, m: &mut Manifest) -> Out {
    let eps = drive_list(c);
    let (inp, phase) = mf_base(&c.params);
    let o = LinewidthOptions { protocol: c.protocol, window: c.window, ..Default::default() };
    let res: Vec<cqad::Result<_>> = timed(m, "transients", |_| {
        eps.par_iter()
            .enumerate()
            .map(|(k, &e)| phonon_linewidth(&inp.with_eps(phase * e), &o).map_err(|err| Error::at(k, e, err)))
            .collect()
    });
    let mut t = Table::new(
        "linewidth.csv",
        &["eps_d_rad_per_us", "n_b", "center_rad_per_us", "fwhm_rad_per_us", "fwhm_over_gamma_b"],
    );
    t.meta("protocol", format!("{:?}", c.protocol));
    t.meta("window", format!("{:?}", c.window));
    for (k, r) in first_error(res)?.iter().enumerate() {
        t.push(vec![eps[k], r.steady.n_b, r.fit.center, r.fit.fwhm, r.fit.fwhm / c.params.gamma_b]);
    }
    Ok(vec![t])
}

pub fn wigner_map(c: &RunConfig, m: &mut Manifest) -> Out {
    let eps = single_drive(c, "wigner")?;
    let p = c.params.with_drive(eps);
    let tr = truncation(c, 20);
    let sol = timed(m, "steady state", |m| solve_points(&[p.clone()], &[eps], &c.variant, &tr, "state", m))?.remove(0);
    let n = sol.realization.phonon_number(&sol.state);
    let reach = c.grid_reach.unwrap_or(1.05 * 2f64.sqrt() * (1.5 * n.sqrt() + 3.0));
    let g: Vec<f64> =
        (0..c.grid_points).map(|k| -reach + 2.0 * reach * k as f64 / (c.grid_points - 1) as f64).collect();
    let w = timed(m, "wigner", |_| wigner(&sol.state, PHONON, &g, &g))?;
    let (px, pp, pw) = w.peak();
    m.results.insert(
        "wigner".into(),
        json!({
            "n_b": n, "normalization": w.normalization, "peak": [px, pp, pw],
            "phase_rad": phonon_phase(&sol.realization, &sol.state).ok(),
        }),
    );
    let mut t = Table::new("wigner.csv", &["x", "p", "W"]);
    t.meta("convention", "alpha = (x + i p) / sqrt(2)");
    t.meta("normalization", w.normalization);
    for (i, &x) in w.x.iter().enumerate() {
        for (j, &pj) in w.p.iter().enumerate() {
            t.push(vec![x, pj, w.at(i, j)]);
        }
    }
    Ok(vec![t])
}

pub fn kerr_compare(c: &RunConfig, m: &mut Manifest) -> Out {
    let eps = drive_list(c);
    let tr = truncation(c, 20);
    let points: Vec<SystemParams> = eps.iter().map(|&e| c.params.with_drive(e)).collect();
    let kerr = Variant::Kerr { levels: c.kerr_levels };
    let tls = timed(m, "two-level", |m| solve_points(&points, &eps, &Variant::Simplified, &tr, "two-level", m))?;
    let multi = timed(m, "multi-level", |m| solve_points(&points, &eps, &kerr, &tr, "multi-level", m))?;
    let mut t = Table::new(
        "kerr_compare.csv",
        &["eps_d_rad_per_us", "n_b_two_level", "n_b_multi_level", "relative_difference", "g2_two_level", "g2_multi_level"],
    );
    t.meta("multi_level", &kerr);
    let mut worst: f64 = 0.0;
    for k in 0..eps.len() {
        let (a, b) = (&tls[k], &multi[k]);
        let na = a.realization.phonon_number(&a.state);
        let nb = b.realization.phonon_number(&b.state);
        let rel = if na > 0.0 { (nb - na) / na } else { f64::NAN };
        if rel.is_finite() {
            worst = worst.max(rel.abs());
        }
        let ga = phonon_g2(&a.realization, &a.state).unwrap_or(f64::NAN);
        let gb = phonon_g2(&b.realization, &b.state).unwrap_or(f64::NAN);
        t.push(vec![eps[k], na, nb, rel, ga, gb]);
    }
    m.results.insert("max_relative_difference".into(), json!(worst));
    Ok(vec![t])
}

pub fn s21(c: &RunConfig, m: &mut Manifest) -> Out {
    let p = &c.params;
    let (omega, data, source) = match &c.data {
        Some(path) => {
            let (f, y) = read_curve(path).map_err(Failure::Config)?;
            (f.iter().map(|f| TAU * f * 1e-6).collect::<Vec<f64>>(), y, format!("file {}", path.display()))
        }
        None => {
            let dets = detunings(c, "linspace(-8, 4, 241)");
            let w: Vec<f64> = dets.iter().map(|d| p.omega_q + d).collect();
            let r = (w[0] + w[w.len() - 1]) / 2.0;
            let truth = coeffs_from(p.kappa, p.chi, p.n_bar_g, p.gamma_1 / 2.0 + p.gamma_phi, p.omega_q - r);
            let rel: Vec<f64> = w.iter().map(|x| x - r).collect();
            let y = s21_model(&rel, &truth, 1.0, 0.0);
            (w, y, "synthetic, noiseless".to_string())
        }
    };
    if omega.len() < 2 {
        return Err(Failure::Config("fit-s21 needs at least two data points".into()));
    }
    let r = (omega[0] + omega[omega.len() - 1]) / 2.0;
    let rel: Vec<f64> = omega.iter().map(|x| x - r).collect();
    let curve = TwoToneCurve::new(rel.clone(), data.clone(), &source).map_err(|e| Failure::Config(e.to_string()))?;
    let fit = timed(m, "fit", |_| fit_s21(&curve, p.chi, p.kappa))?;
    let coeffs = coeffs_from(p.kappa, p.chi, fit.n_bar_g, fit.gamma_q, fit.omega_q);
    let model = s21_model(&rel, &coeffs, fit.scale, fit.offset);
    m.results.insert(
        "fit".into(),
        json!({
            "source": source,
            "omega_q_mhz": (fit.omega_q + r) / TAU,
            "gamma_q_rad_per_us": fit.gamma_q,
            "n_bar_g": fit.n_bar_g,
            "scale": fit.scale,
            "offset": fit.offset,
            "std_errors": fit.std_errors,
            "reduced_chi2": fit.reduced_chi2,
        }),
    );
    let mut t = Table::new("fit_s21.csv", &["freq_Hz", "data", "model"]);
    t.meta("source", &source);
    t.meta("omega_q_MHz", (fit.omega_q + r) / TAU);
    t.meta("gamma_q_rad_per_us", fit.gamma_q);
    t.meta("n_bar_g", fit.n_bar_g);
    for k in 0..omega.len() {
        t.push(vec![hz(omega[k]), data[k], model[k]]);
    }
    Ok(vec![t])
}

pub fn validate(m: &mut Manifest) -> Out {
    let checks = timed(m, "suite", |_| cqad::validate::run_suite());
    let mut t = Table::new("validate.csv", &["check", "passed"]);
    let mut failed = vec![];
    for (k, ch) in checks.iter().enumerate() {
        t.meta(&format!("check {k}"), ch.name);
        t.push(vec![k as f64, if ch.passed { 1.0 } else { 0.0 }]);
        if !ch.passed {
            failed.push(format!("{}: {}", ch.name, ch.detail));
        }
    }
    m.results.insert("checks".into(), json!(checks.len()));
    m.results.insert("failed".into(), json!(failed));
    if !failed.is_empty() {
        return Err(Failure::Numeric(format!("{} of {} checks failed: {}", failed.len(), checks.len(), failed.join("; "))));
    }
    Ok(vec![t])
}
