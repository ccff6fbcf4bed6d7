//! INI-style run configuration: a `[params]` section in human units and an
//! `[experiment]` section. Units are converted once, here.

use cqad::meanfield::{LinewidthProtocol, Window};
use cqad::models::{SystemParams, Variant};
use cqad::TAU;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 0 when the problem is not tied to a line.
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}", self.line, self.msg)
        } else {
            write!(f, "{}", self.msg)
        }
    }
}

fn at<T>(line: usize, r: Result<T, String>) -> Result<T, ConfigError> {
    r.map_err(|msg| ConfigError { line, msg })
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, msg: msg.into() })
}

/// Drive-power axis: amplitudes in rad/µs, or room-temperature powers in
/// dBm converted through the calibration offset.
#[derive(Debug, Clone, PartialEq)]
pub enum DriveAxis {
    Eps(Vec<f64>),
    Dbm(Vec<f64>),
}

impl DriveAxis {
    pub fn kind(&self) -> &'static str {
        match self {
            DriveAxis::Eps(_) => "eps_d",
            DriveAxis::Dbm(_) => "dBm",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            DriveAxis::Eps(v) | DriveAxis::Dbm(v) => v.len(),
        }
    }

    /// Drive amplitudes in rad/µs.
    pub fn amplitudes(&self, delta_cal: f64) -> Vec<f64> {
        match self {
            DriveAxis::Eps(v) => v.clone(),
            DriveAxis::Dbm(v) => v.iter().map(|&p| cqad::models::calibrate_drive(p, delta_cal)).collect(),
        }
    }

    pub fn dbm(&self) -> Option<&[f64]> {
        match self {
            DriveAxis::Dbm(v) => Some(v),
            DriveAxis::Eps(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: SystemParams,
    pub preset: String,
    pub units: String,
    /// Whether `delta_cal` was given explicitly (required for dBm axes).
    pub delta_cal_set: bool,
    pub name: Option<String>,
    pub variant: Variant,
    pub drive: Option<DriveAxis>,
    /// Drive detunings Δ_b in MHz.
    pub detuning_mhz: Option<Vec<f64>>,
    pub fock_phonon: Option<usize>,
    pub fock_cavity: Option<usize>,
    pub fock_cap: Option<usize>,
    pub kerr_levels: usize,
    pub t_on: Option<f64>,
    pub t_off: Option<f64>,
    pub dt: Option<f64>,
    /// Extra drive detuning of the `--detuned` ringdown, MHz.
    pub detuned_mhz: f64,
    pub grid_reach: Option<f64>,
    pub grid_points: usize,
    pub data: Option<PathBuf>,
    pub tol: Option<f64>,
    pub protocol: LinewidthProtocol,
    pub window: Window,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: SystemParams::default(),
            preset: "device".into(),
            units: "MHz".into(),
            delta_cal_set: false,
            name: None,
            variant: Variant::Simplified,
            drive: None,
            detuning_mhz: None,
            fock_phonon: None,
            fock_cavity: None,
            fock_cap: None,
            kerr_levels: 3,
            t_on: None,
            t_off: None,
            dt: None,
            detuned_mhz: 1.0,
            grid_reach: None,
            grid_points: 121,
            data: None,
            tol: None,
            protocol: LinewidthProtocol::RingUp,
            window: Window::Rectangular,
        }
    }
}

/// Keys of `[params]` that are rates or frequencies (scaled by 2π and the unit).
const RATE_KEYS: [&str; 15] = [
    "omega_r", "kappa", "omega_b", "gamma_b", "omega_q", "gamma_1", "gamma_phi", "alpha_anh", "g_qb", "chi",
    "delta_r", "delta_q", "delta_b", "eps_p", "eps_d",
];

fn rate_field<'a>(p: &'a mut SystemParams, key: &str) -> Option<&'a mut f64> {
    Some(match key {
        "omega_r" => &mut p.omega_r,
        "kappa" => &mut p.kappa,
        "omega_b" => &mut p.omega_b,
        "gamma_b" => &mut p.gamma_b,
        "omega_q" => &mut p.omega_q,
        "gamma_1" => &mut p.gamma_1,
        "gamma_phi" => &mut p.gamma_phi,
        "alpha_anh" => &mut p.alpha_anh,
        "g_qb" => &mut p.g_qb,
        "chi" => &mut p.chi,
        "delta_r" => &mut p.delta_r,
        "delta_q" => &mut p.delta_q,
        "delta_b" => &mut p.delta_b,
        "eps_p" => &mut p.eps_p,
        "eps_d" => &mut p.eps_d,
        _ => return None,
    })
}

/// A number, optionally written `2pi*x`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (factor, rest) = match s.strip_prefix("2pi*") {
        Some(r) => (TAU, r),
        None => (1.0, s),
    };
    let v: f64 = rest.trim().parse().map_err(|_| format!("not a number: '{s}'"))?;
    if !v.is_finite() {
        return Err(format!("not a finite number: '{s}'"));
    }
    Ok(factor * v)
}

fn parse_count(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("not a non-negative integer: '{}'", s.trim()))
}

/// `a, b, c`, `linspace(start, stop, n)` or `logspace(start, stop, n)` (the
/// endpoints are values, not exponents).
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    for (kw, log) in [("linspace", false), ("logspace", true)] {
        if let Some(rest) = s.strip_prefix(kw) {
            let inner = rest
                .trim()
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| format!("expected {kw}(start, stop, n)"))?;
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 3 {
                return Err(format!("expected {kw}(start, stop, n)"));
            }
            let a = parse_number(parts[0])?;
            let b = parse_number(parts[1])?;
            let n = parse_count(parts[2])?;
            if n < 2 {
                return Err(format!("{kw} needs at least two points"));
            }
            if log && !(a > 0.0 && b > 0.0) {
                return Err("logspace endpoints must be positive".into());
            }
            let t = |k: usize| k as f64 / (n - 1) as f64;
            return Ok((0..n)
                .map(|k| if log { (a.ln() + (b.ln() - a.ln()) * t(k)).exp() } else { a + (b - a) * t(k) })
                .collect());
        }
    }
    let v: Result<Vec<f64>, String> = s.split(',').map(parse_number).collect();
    let v = v?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(v)
}

pub fn parse_variant(s: &str) -> Result<Variant, String> {
    let s = s.trim();
    match s {
        "full" => return Ok(Variant::Full),
        "effective" => return Ok(Variant::Effective),
        "simplified" => return Ok(Variant::Simplified),
        _ => {}
    }
    if let Some(n) = s.strip_prefix("kerr(").and_then(|r| r.strip_suffix(')')) {
        let levels = parse_count(n)?;
        if levels < 2 {
            return Err("kerr needs at least two levels".into());
        }
        return Ok(Variant::Kerr { levels });
    }
    Err(format!("unknown variant '{s}' (full, effective, simplified, kerr(N))"))
}

fn parse_protocol(s: &str) -> Result<LinewidthProtocol, String> {
    let s = s.trim();
    if s == "ringup" {
        return Ok(LinewidthProtocol::RingUp);
    }
    if let Some(f) = s.strip_prefix("seeded(").and_then(|r| r.strip_suffix(')')) {
        return Ok(LinewidthProtocol::Seeded { fraction: parse_number(f)? });
    }
    Err(format!("unknown protocol '{s}' (ringup, seeded(f))"))
}

fn positive(v: f64, what: &str) -> Result<f64, String> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{what} must be positive"))
    }
}

pub const EXPERIMENTS: [&str; 9] = [
    "two-tone",
    "sweep-power",
    "ringdown",
    "meanfield-sweep",
    "linewidth",
    "wigner",
    "kerr-compare",
    "fit-s21",
    "validate",
];

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut section = String::new();
        let mut seen: BTreeMap<(String, String), usize> = BTreeMap::new();
        let mut params: Vec<(usize, String, String)> = Vec::new();
        let mut exp: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split(['#', ';']).next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(ConfigError { line, msg: "unterminated section header".into() })?;
                section = name.trim().to_string();
                if section != "params" && section != "experiment" {
                    return err(line, format!("unknown section [{section}] (expected [params] or [experiment])"));
                }
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return err(line, format!("expected key = value, got '{body}'"));
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if section.is_empty() {
                return err(line, format!("key '{k}' outside any section"));
            }
            if let Some(first) = seen.insert((section.clone(), k.clone()), line) {
                return err(line, format!("duplicate key '{k}' (first set on line {first})"));
            }
            if section == "params" {
                params.push((line, k, v));
            } else {
                exp.push((line, k, v));
            }
        }

        let mut c = RunConfig::default();
        // preset and units first, wherever they appear in the section
        for (line, k, v) in &params {
            match k.as_str() {
                "preset" => {
                    c.params = match v.as_str() {
                        "device" => SystemParams::default(),
                        "desk" => SystemParams::desk(),
                        _ => return err(*line, format!("unknown preset '{v}' (device, desk)")),
                    };
                    c.preset = v.clone();
                }
                "units" => {
                    if v != "MHz" && v != "kHz" {
                        return err(*line, format!("unknown units '{v}' (MHz, kHz)"));
                    }
                    c.units = v.clone();
                }
                _ => {}
            }
        }
        let unit = if c.units == "kHz" { 1e-3 } else { 1.0 };
        for (line, k, v) in &params {
            let line = *line;
            let key = k.as_str();
            if key == "preset" || key == "units" {
                continue;
            }
            let x = parse_number(v).or_else(|m| err(line, m))?;
            if RATE_KEYS.contains(&key) {
                *rate_field(&mut c.params, key).unwrap() = TAU * unit * x;
            } else {
                match key {
                    "drive_phase" => c.params.drive_phase = x,
                    "n_bar_g" => c.params.n_bar_g = x,
                    "delta_cal" => {
                        c.params.delta_cal = x;
                        c.delta_cal_set = true;
                    }
                    _ => return err(line, format!("unknown parameter '{key}'")),
                }
            }
        }
        c.params.validate().map_err(|e| ConfigError { line: 0, msg: format!("[params]: {e}") })?;

        for (line, k, v) in &exp {
            let line = *line;
            match k.as_str() {
                "name" => {
                    if !EXPERIMENTS.contains(&v.as_str()) {
                        return err(line, format!("unknown experiment '{v}'"));
                    }
                    c.name = Some(v.clone());
                }
                "variant" => c.variant = at(line, parse_variant(v))?,
                "drive_eps" => {
                    if c.drive.is_some() {
                        return err(line, "give either drive_eps or drive_dbm, not both");
                    }
                    c.drive = Some(DriveAxis::Eps(at(line, parse_list(v))?));
                }
                "drive_dbm" => {
                    if c.drive.is_some() {
                        return err(line, "give either drive_eps or drive_dbm, not both");
                    }
                    if !c.delta_cal_set {
                        return err(line, "drive_dbm needs delta_cal in [params]");
                    }
                    c.drive = Some(DriveAxis::Dbm(at(line, parse_list(v))?));
                }
                "detuning_mhz" => c.detuning_mhz = Some(at(line, parse_list(v))?),
                "fock_phonon" => c.fock_phonon = Some(at(line, parse_count(v))?),
                "fock_cavity" => c.fock_cavity = Some(at(line, parse_count(v))?),
                "fock_cap" => c.fock_cap = Some(at(line, parse_count(v))?),
                "kerr_levels" => c.kerr_levels = at(line, parse_count(v))?,
                "t_on" => c.t_on = Some(at(line, parse_number(v).and_then(|x| positive(x, "t_on")))?),
                "t_off" => c.t_off = Some(at(line, parse_number(v).and_then(|x| positive(x, "t_off")))?),
                "dt" => c.dt = Some(at(line, parse_number(v).and_then(|x| positive(x, "dt")))?),
                "detuned_mhz" => c.detuned_mhz = at(line, parse_number(v))?,
                "grid_reach" => c.grid_reach = Some(at(line, parse_number(v).and_then(|x| positive(x, "grid_reach")))?),
                "grid_points" => c.grid_points = at(line, parse_count(v))?,
                "data" => c.data = Some(PathBuf::from(v)),
                "tol" => c.tol = Some(at(line, parse_number(v).and_then(|x| positive(x, "tol")))?),
                "protocol" => c.protocol = at(line, parse_protocol(v))?,
                "window" => {
                    c.window = match v.as_str() {
                        "rect" => Window::Rectangular,
                        "hann" => Window::Hann,
                        _ => return err(line, format!("unknown window '{v}' (rect, hann)")),
                    }
                }
                other => return err(line, format!("unknown experiment key '{other}'")),
            }
        }
        if !exp.is_empty() || !params.is_empty() {
            if c.name.is_none() {
                return err(0, "[experiment] is missing the required key 'name'");
            }
        }
        if c.kerr_levels < 2 {
            return err(0, "kerr_levels must be at least 2");
        }
        if c.grid_points < 2 {
            return err(0, "grid_points must be at least 2");
        }
        Ok(c)
    }

    /// Canonical text of the resolved configuration, the input of the config hash.
    pub fn canonical(&self, experiment: &str) -> String {
        let mut s = format!("experiment={experiment}\n");
        s += &params_canonical(&self.params);
        let opt = |v: &Option<f64>| v.map_or("auto".to_string(), |x| format!("{x:?}"));
        let optn = |v: &Option<usize>| v.map_or("auto".to_string(), |x| x.to_string());
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        s += &format!("variant={}\n", self.variant);
        match &self.drive {
            Some(d) => s += &format!("drive.{}={}\n", d.kind(), list(&d.amplitudes(self.params.delta_cal))),
            None => s += "drive=auto\n",
        }
        s += &format!("detuning_mhz={}\n", self.detuning_mhz.as_deref().map_or("auto".into(), list));
        s += &format!(
            "fock={},{},{}\nkerr_levels={}\n",
            optn(&self.fock_phonon),
            optn(&self.fock_cavity),
            optn(&self.fock_cap),
            self.kerr_levels
        );
        s += &format!("ringdown={},{},{},{:?}\n", opt(&self.t_on), opt(&self.t_off), opt(&self.dt), self.detuned_mhz);
        s += &format!("grid={},{}\n", opt(&self.grid_reach), self.grid_points);
        s += &format!("data={}\n", self.data.as_ref().map_or("none".into(), |p| p.display().to_string()));
        s += &format!("tol={}\nprotocol={:?}\nwindow={:?}\n", opt(&self.tol), self.protocol, self.window);
        s
    }
}

pub fn params_canonical(p: &SystemParams) -> String {
    format!("{p:?}\n")
}
