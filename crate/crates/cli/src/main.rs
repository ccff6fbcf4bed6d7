//! `cqad`: batch experiment runner. Loads a parameter file, runs one named
//! experiment, writes CSV tables and `manifest.json` to the output directory.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numeric failure.

mod config;
mod experiments;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{parse_list, parse_variant, DriveAxis, RunConfig};
use experiments::{Failure, RingdownSelection};
use output::{sha256_hex, Manifest};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "cqad", version, about = "Driven qubit / phonon-mode simulations and analyses")]
struct Cli {
    /// Parameter file ([params] and [experiment] sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: out/<experiment>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Steady-state residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Axis overrides shared by the sweep experiments.
#[derive(Args, Debug, Default, Clone)]
struct Axes {
    /// Drive amplitudes in rad/us: list, linspace(a,b,n) or logspace(a,b,n).
    #[arg(long)]
    drive_eps: Option<String>,
    /// Drive powers in dBm (needs delta_cal).
    #[arg(long)]
    drive_dbm: Option<String>,
    /// Drive detunings from the phonon mode, MHz.
    #[arg(long)]
    detuning_mhz: Option<String>,
    /// Model variant: full, effective, simplified or kerr(N).
    #[arg(long)]
    variant: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Steady qubit excitation against drive frequency, with the transparency width.
    TwoTone(Axes),
    /// Phonon population, g2(0) and dip width against drive strength.
    SweepPower(Axes),
    /// Gated drive then free decay, drive on and off the phonon resonance.
    Ringdown {
        #[command(flatten)]
        axes: Axes,
        #[arg(long)]
        resonant: bool,
        #[arg(long)]
        detuned: bool,
    },
    /// Semiclassical steady states against drive strength.
    MeanfieldSweep(Axes),
    /// Phonon linewidth from the semiclassical transient.
    Linewidth(Axes),
    /// Phonon Wigner function of the steady state.
    Wigner {
        #[command(flatten)]
        axes: Axes,
        #[arg(long)]
        grid_reach: Option<f64>,
        #[arg(long)]
        grid_points: Option<usize>,
    },
    /// Two-level against multi-level transmon.
    KerrCompare {
        #[command(flatten)]
        axes: Axes,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Fit the dispersive S21 lineshape to supplied or synthetic data.
    FitS21 {
        #[command(flatten)]
        axes: Axes,
        /// CSV with `freq_Hz, value` columns.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run the structural and reference-value check suite.
    Validate,
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::TwoTone(_) => "two-tone",
            Cmd::SweepPower(_) => "sweep-power",
            Cmd::Ringdown { .. } => "ringdown",
            Cmd::MeanfieldSweep(_) => "meanfield-sweep",
            Cmd::Linewidth(_) => "linewidth",
            Cmd::Wigner { .. } => "wigner",
            Cmd::KerrCompare { .. } => "kerr-compare",
            Cmd::FitS21 { .. } => "fit-s21",
            Cmd::Validate => "validate",
        }
    }

    fn axes(&self) -> Option<&Axes> {
        match self {
            Cmd::TwoTone(a) | Cmd::SweepPower(a) | Cmd::MeanfieldSweep(a) | Cmd::Linewidth(a) => Some(a),
            Cmd::Ringdown { axes, .. } | Cmd::Wigner { axes, .. } | Cmd::KerrCompare { axes, .. } => Some(axes),
            Cmd::FitS21 { axes, .. } => Some(axes),
            Cmd::Validate => None,
        }
    }
}

fn apply_overrides(c: &mut RunConfig, cli: &Cli) -> Result<(), String> {
    if let Some(a) = cli.cmd.axes() {
        if a.drive_eps.is_some() && a.drive_dbm.is_some() {
            return Err("give either --drive-eps or --drive-dbm, not both".into());
        }
        if let Some(s) = &a.drive_eps {
            c.drive = Some(DriveAxis::Eps(parse_list(s).map_err(|e| format!("--drive-eps: {e}"))?));
        }
        if let Some(s) = &a.drive_dbm {
            if !c.delta_cal_set {
                return Err("--drive-dbm needs delta_cal in [params]".into());
            }
            c.drive = Some(DriveAxis::Dbm(parse_list(s).map_err(|e| format!("--drive-dbm: {e}"))?));
        }
        if let Some(s) = &a.detuning_mhz {
            c.detuning_mhz = Some(parse_list(s).map_err(|e| format!("--detuning-mhz: {e}"))?);
        }
        if let Some(s) = &a.variant {
            c.variant = parse_variant(s).map_err(|e| format!("--variant: {e}"))?;
        }
    }
    match &cli.cmd {
        Cmd::Wigner { grid_reach, grid_points, .. } => {
            if let Some(r) = grid_reach {
                c.grid_reach = Some(*r);
            }
            if let Some(n) = grid_points {
                c.grid_points = *n;
            }
        }
        Cmd::KerrCompare { levels: Some(l), .. } => c.kerr_levels = *l,
        Cmd::FitS21 { data: Some(d), .. } => c.data = Some(d.clone()),
        _ => {}
    }
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err("--tol must be positive".into());
        }
        c.tol = Some(t);
    }
    if c.kerr_levels < 2 || c.grid_points < 2 {
        return Err("kerr levels and grid points must be at least 2".into());
    }
    Ok(())
}

fn load(cli: &Cli) -> Result<RunConfig, String> {
    let mut c = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let c = RunConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            if let Some(n) = &c.name {
                if n != cli.cmd.name() {
                    return Err(format!("{}: config is for '{n}' but '{}' was requested", path.display(), cli.cmd.name()));
                }
            }
            c
        }
        None => RunConfig::default(),
    };
    apply_overrides(&mut c, cli)?;
    Ok(c)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli).map_err(Failure::Config)?;
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Failure::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot size the worker pool: {e}")))?;
    }
    if let Some(t) = cfg.tol {
        cqad::lindblad::set_steady_tolerance(t);
    }
    let name = cli.cmd.name();
    let config_hash = sha256_hex(&cfg.canonical(name));
    let params_hash = sha256_hex(&config::params_canonical(&cfg.params));
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out").join(name));

    let mut m = Manifest::default();
    let t0 = Instant::now();
    let result = match &cli.cmd {
        Cmd::TwoTone(_) => experiments::two_tone(&cfg, &mut m),
        Cmd::SweepPower(_) => experiments::sweep_power(&cfg, &mut m),
        Cmd::Ringdown { resonant, detuned, .. } => {
            let both = !resonant && !detuned;
            let sel = RingdownSelection { resonant: *resonant || both, detuned: *detuned || both };
            experiments::ringdown(&cfg, sel, &mut m)
        }
        Cmd::MeanfieldSweep(_) => experiments::meanfield_sweep(&cfg, &mut m),
        Cmd::Linewidth(_) => experiments::linewidth(&cfg, &mut m),
        Cmd::Wigner { .. } => experiments::wigner_map(&cfg, &mut m),
        Cmd::KerrCompare { .. } => experiments::kerr_compare(&cfg, &mut m),
        Cmd::FitS21 { .. } => experiments::s21(&cfg, &mut m),
        Cmd::Validate => experiments::validate(&mut m),
    };
    m.timings.push(("total".into(), t0.elapsed().as_secs_f64()));
    let tables = result?;

    std::fs::create_dir_all(&out).map_err(|e| Failure::Config(format!("cannot create {}: {e}", out.display())))?;
    let header = vec![
        ("experiment".to_string(), name.to_string()),
        ("config_hash".to_string(), config_hash.clone()),
        ("params_hash".to_string(), params_hash.clone()),
        ("variant".to_string(), cfg.variant.to_string()),
        ("units".to_string(), "rates rad/us, times us, frequencies Hz".to_string()),
    ];
    let mut written = vec![];
    for t in &tables {
        let path = out.join(&t.file);
        std::fs::write(&path, t.render(&header))
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    let power_axis = cfg.drive.as_ref().map_or("eps_d", |d| d.kind());
    let settings = json!({
        "jobs": cli.jobs,
        "steady_tolerance": cqad::lindblad::steady_tolerance(),
        "preset": cfg.preset,
        "params_units": cfg.units,
        "delta_cal_db": cfg.params.delta_cal,
        "params": config::params_canonical(&cfg.params).trim(),
    });
    let manifest = m.to_json(name, &config_hash, &params_hash, power_axis, &written, settings);
    let path = out.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap() + "\n")
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    for w in &m.warnings {
        eprintln!("warning: {w}");
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(2)
        }
    }
}
