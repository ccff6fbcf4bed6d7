//! Hamiltonians and dissipators for every model variant, built from one
//! parameter record.

use crate::error::{Error, Result};
use crate::lindblad::{build_liouvillian, steady_state, Liouvillian};
use crate::quantum::{self, local, make_space, DensityMatrix, HilbertSpace, Operator};
use crate::{C64, TAU};

/// Physical parameters. Angular units (rad/µs) throughout except the
/// dimensionless `n_bar_g`, the phase in radians and `delta_cal` in dB.
///
/// Detunings are the primary inputs (drive minus mode frequency); absolute
/// frequencies are recorded for output only.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    pub omega_r: f64,
    pub kappa: f64,
    pub omega_b: f64,
    pub gamma_b: f64,
    pub omega_q: f64,
    pub gamma_1: f64,
    pub gamma_phi: f64,
    pub alpha_anh: f64,
    pub g_qb: f64,
    pub chi: f64,
    pub delta_r: f64,
    pub delta_q: f64,
    pub delta_b: f64,
    pub eps_p: f64,
    pub eps_d: f64,
    pub drive_phase: f64,
    pub n_bar_g: f64,
    pub delta_cal: f64,
}

impl Default for SystemParams {
    /// Device values; qubit drive at the phonon frequency, 3 MHz below the qubit.
    fn default() -> Self {
        SystemParams {
            omega_r: TAU * 4910.0,
            kappa: TAU * 2.897,
            omega_b: TAU * 6064.0,
            gamma_b: TAU * 6.81e-3,
            omega_q: TAU * 6067.0,
            gamma_1: TAU * 0.840,
            gamma_phi: 0.0,
            alpha_anh: -TAU * 260.0,
            g_qb: TAU * 0.162,
            chi: -TAU * 1.2,
            delta_r: 0.0,
            delta_q: TAU * (6064.0 - 6067.0),
            delta_b: 0.0,
            eps_p: 0.0,
            eps_d: 0.0,
            drive_phase: 0.0,
            n_bar_g: 0.0,
            delta_cal: 0.0,
        }
    }
}

impl SystemParams {
    /// Reduced "desk" set: broadened qubit (1.5 MHz) and phonon (25 kHz),
    /// qubit, phonon and drive all resonant.
    pub fn desk() -> Self {
        let omega_b = TAU * 6064.0;
        SystemParams {
            gamma_1: TAU * 1.5,
            gamma_b: TAU * 25e-3,
            omega_q: omega_b,
            delta_q: 0.0,
            delta_b: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("kappa", self.kappa),
            ("gamma_b", self.gamma_b),
            ("Gamma_1", self.gamma_1),
            ("Gamma_phi", self.gamma_phi),
            ("g_qb", self.g_qb),
            ("n_bar_g", self.n_bar_g),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be non-negative, got {v}")));
            }
        }
        let all = [
            self.omega_r, self.omega_b, self.omega_q, self.alpha_anh, self.chi, self.delta_r, self.delta_q,
            self.delta_b, self.eps_p, self.eps_d, self.drive_phase, self.delta_cal,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Probe amplitude: set from `n_bar_g` when that is positive, so that the
    /// cavity with the qubit in |g⟩ holds n̄_g photons; otherwise `eps_p`.
    pub fn probe_amplitude(&self) -> f64 {
        if self.n_bar_g > 0.0 {
            self.n_bar_g.sqrt() * C64::new(-self.kappa / 2.0, self.delta_r).norm()
        } else {
            self.eps_p
        }
    }

    pub fn drive(&self) -> C64 {
        C64::from_polar(self.eps_d, self.drive_phase)
    }

    pub fn with_drive(&self, eps_d: f64) -> Self {
        SystemParams { eps_d, ..self.clone() }
    }

    /// Same drive detuning applied to qubit and phonon, keeping their offset.
    pub fn with_drive_detuning(&self, delta_b: f64) -> Self {
        let offset = self.delta_q - self.delta_b;
        SystemParams { delta_b, delta_q: delta_b + offset, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Variant {
    Full,
    Effective,
    Simplified,
    Kerr { levels: usize },
    /// Simplified model with a direct phonon drive, in the displaced phonon frame.
    PhononDrive,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Full => write!(f, "full"),
            Variant::Effective => write!(f, "effective"),
            Variant::Simplified => write!(f, "simplified"),
            Variant::Kerr { levels } => write!(f, "kerr({levels})"),
            Variant::PhononDrive => write!(f, "phonon-drive"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModelRealization {
    pub h: Operator,
    pub collapses: Vec<(Operator, f64)>,
    pub space: HilbertSpace,
    pub variant: Variant,
    /// Coherent phonon displacement β: the stored phonon operators act on b − β.
    pub displacement: C64,
}

pub const QUBIT: usize = 0;
pub const PHONON: usize = 1;
pub const CAVITY: usize = 2;

impl ModelRealization {
    pub fn liouvillian(&self) -> Result<Liouvillian> {
        build_liouvillian(&self.h, &self.collapses)
    }

    pub fn steady_state(&self) -> Result<DensityMatrix> {
        steady_state(&self.liouvillian()?)
    }

    pub fn fock_phonon(&self) -> usize {
        self.space.dims()[PHONON]
    }

    /// Qubit excitation σ+σ− (c†c for the Kerr variant).
    pub fn qubit_excitation(&self) -> Operator {
        quantum::number(&self.space, QUBIT).unwrap()
    }

    pub fn phonon_destroy(&self) -> Operator {
        quantum::destroy(&self.space, PHONON).unwrap()
    }

    /// ⟨b⟩ in the lab (undisplaced) frame.
    pub fn phonon_amplitude(&self, rho: &DensityMatrix) -> C64 {
        quantum::expectation(&self.phonon_destroy(), rho).unwrap() + self.displacement
    }

    /// ⟨b†b⟩ in the lab frame.
    pub fn phonon_number(&self, rho: &DensityMatrix) -> f64 {
        let b = self.phonon_destroy();
        let n = quantum::expectation(&(&b.dagger() * &b), rho).unwrap().re;
        let bm = quantum::expectation(&b, rho).unwrap();
        n + 2.0 * (self.displacement.conj() * bm).re + self.displacement.norm_sqr()
    }

    /// ⟨b†b†bb⟩ in the lab frame.
    pub fn phonon_pair_number(&self, rho: &DensityMatrix) -> f64 {
        let b = self.phonon_destroy();
        let beta = self.displacement;
        let id = Operator::identity(&self.space);
        let bl = &b + &(&id * beta);
        let bb = &bl * &bl;
        quantum::expectation(&(&bb.dagger() * &bb), rho).unwrap().re
    }

    pub fn qubit_population(&self, rho: &DensityMatrix) -> f64 {
        quantum::expectation(&self.qubit_excitation(), rho).unwrap().re
    }
}

fn hermitian_or_err(h: &Operator) -> Result<()> {
    let e = h.hermiticity_error();
    if e > 1e-12 {
        Err(Error::NotHermitian(e))
    } else {
        Ok(())
    }
}

/// Qubit–phonon part shared by the two-level variants:
/// −(Δ_q/2)σz − Δ_b b†b + g(b†σ− + bσ+) + ε(e^{iφ}σ+ + e^{−iφ}σ−).
fn qubit_phonon_terms(space: &HilbertSpace, delta_q: f64, p: &SystemParams) -> Result<Operator> {
    let sm = quantum::sigma_minus(space, QUBIT)?;
    let sp = sm.dagger();
    let sz = quantum::sigma_z(space, QUBIT)?;
    let b = quantum::destroy(space, PHONON)?;
    let bd = b.dagger();
    let eps = p.drive();
    let mut h = &sz * (-delta_q / 2.0);
    h = &h + &(&(&bd * &b) * (-p.delta_b));
    h = &h + &(&(&(&bd * &sm) + &(&b * &sp)) * p.g_qb);
    h = &h + &(&(&sp * eps) + &(&sm * eps.conj()));
    Ok(h)
}

fn check_fock(n: usize, what: &str) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidArgument(format!("{what} truncation must be at least 2")))
    } else {
        Ok(())
    }
}

/// Probability that a Poisson distribution of mean `mean` reaches `n` or more.
fn poisson_tail(mean: f64, n: usize) -> f64 {
    let mut p = (-mean).exp();
    let mut below = 0.0;
    for k in 0..n {
        below += p;
        p *= mean / (k + 1) as f64;
    }
    (1.0 - below).max(0.0)
}

/// Three-body model in the frame co-rotating with pump and probe.
pub fn full_model(p: &SystemParams, fock_phonon: usize, fock_cavity: usize) -> Result<ModelRealization> {
    p.validate()?;
    check_fock(fock_phonon, "phonon")?;
    check_fock(fock_cavity, "cavity")?;
    let eps_p = p.probe_amplitude();
    // cavity frequencies with the qubit in g and e
    let kap = p.kappa.max(1e-300);
    let amp = |w: f64| eps_p / C64::new(kap / 2.0, w).norm();
    let worst = amp(-p.delta_r).max(amp(-p.delta_r + 2.0 * p.chi));
    if poisson_tail(worst * worst, fock_cavity - 1) > 1e-6 {
        return Err(Error::Truncation(format!(
            "cavity truncation {fock_cavity} too small for |alpha|^2 = {:.3}",
            worst * worst
        )));
    }
    let space = make_space(&[2, fock_phonon, fock_cavity])?;
    let a = quantum::destroy(&space, CAVITY)?;
    let ad = a.dagger();
    let na = &ad * &a;
    let sz = quantum::sigma_z(&space, QUBIT)?;
    let mut h = qubit_phonon_terms(&space, p.delta_q, p)?;
    h = &h + &(&na * (-p.delta_r + p.chi));
    h = &h + &(&(&na * &sz) * p.chi);
    h = &h + &(&(&a + &ad) * eps_p);
    hermitian_or_err(&h)?;
    let collapses = vec![
        (a, p.kappa),
        (quantum::destroy(&space, PHONON)?, p.gamma_b),
        (quantum::sigma_minus(&space, QUBIT)?, p.gamma_1),
        (sz, p.gamma_phi / 2.0),
    ];
    Ok(ModelRealization { h, collapses, space, variant: Variant::Full, displacement: C64::new(0.0, 0.0) })
}

/// Cavity amplitudes conditioned on the qubit state:
/// α_e = iε_p/(i(Δ_r − χ) − κ/2), α_g = iε_p/(i(Δ_r + χ) − κ/2).
pub fn pointer_states(p: &SystemParams) -> (C64, C64) {
    pointer_states_at(p.probe_amplitude(), p.delta_r, p.chi, p.kappa)
}

pub fn pointer_states_at(eps_p: f64, delta_r: f64, chi: f64, kappa: f64) -> (C64, C64) {
    let i = C64::new(0.0, 1.0);
    let num = i * eps_p;
    let alpha_e = num / C64::new(-kappa / 2.0, delta_r - chi);
    let alpha_g = num / C64::new(-kappa / 2.0, delta_r + chi);
    (alpha_g, alpha_e)
}

#[derive(Clone, Debug)]
pub struct EffectiveModelOutput {
    pub realization: ModelRealization,
    pub alpha_g: C64,
    pub alpha_e: C64,
    pub gamma_phi_cav: f64,
    pub omega_q_cav: f64,
    pub gamma_phi_total: f64,
    pub gamma_2_tilde: f64,
    pub delta_q_tilde: f64,
}

/// Cavity-induced shift and dephasing. The pointer amplitudes are those of
/// the full-model cavity, whose ground-state resonance sits at Δ_r (hence the
/// χ offset passed to the closed form).
pub fn cavity_induced(p: &SystemParams) -> (C64, C64, f64, f64) {
    let (ag, ae) = pointer_states_at(p.probe_amplitude(), p.delta_r - p.chi, p.chi, p.kappa);
    let prod = ag * ae.conj();
    (ag, ae, 2.0 * p.chi * prod.re, 2.0 * p.chi * prod.im)
}

/// Qubit ⊗ phonon model with the cavity adiabatically eliminated.
pub fn effective_model(p: &SystemParams, fock_phonon: usize) -> Result<EffectiveModelOutput> {
    p.validate()?;
    check_fock(fock_phonon, "phonon")?;
    let (alpha_g, alpha_e, omega_q_cav, gamma_phi_cav) = cavity_induced(p);
    let gamma_phi_total = p.gamma_phi + gamma_phi_cav;
    let gamma_2_tilde = p.gamma_1 / 2.0 + gamma_phi_total;
    let delta_q_tilde = p.delta_q - omega_q_cav;
    let space = make_space(&[2, fock_phonon])?;
    let h = qubit_phonon_terms(&space, delta_q_tilde, p)?;
    hermitian_or_err(&h)?;
    let collapses = vec![
        (quantum::destroy(&space, PHONON)?, p.gamma_b),
        (quantum::sigma_minus(&space, QUBIT)?, p.gamma_1),
        (quantum::sigma_z(&space, QUBIT)?, gamma_phi_total / 2.0),
    ];
    Ok(EffectiveModelOutput {
        realization: ModelRealization {
            h,
            collapses,
            space,
            variant: Variant::Effective,
            displacement: C64::new(0.0, 0.0),
        },
        alpha_g,
        alpha_e,
        gamma_phi_cav,
        omega_q_cav,
        gamma_phi_total,
        gamma_2_tilde,
        delta_q_tilde,
    })
}

/// Two-level qubit and phonon without the readout cavity.
pub fn simplified_model(p: &SystemParams, fock_phonon: usize) -> Result<ModelRealization> {
    p.validate()?;
    check_fock(fock_phonon, "phonon")?;
    let space = make_space(&[2, fock_phonon])?;
    let h = qubit_phonon_terms(&space, p.delta_q, p)?;
    hermitian_or_err(&h)?;
    let collapses = vec![
        (quantum::destroy(&space, PHONON)?, p.gamma_b),
        (quantum::sigma_minus(&space, QUBIT)?, p.gamma_1),
        (quantum::sigma_z(&space, QUBIT)?, p.gamma_phi / 2.0),
    ];
    Ok(ModelRealization { h, collapses, space, variant: Variant::Simplified, displacement: C64::new(0.0, 0.0) })
}

/// Transmon as a Kerr oscillator with `levels` levels.
///
/// Dephasing uses c†c at rate 2Γ_φ, which reproduces (Γ_φ/2)𝓛[σz] on two
/// levels. With two levels the Hamiltonian equals the simplified one up to
/// the constant Δ_q/2.
pub fn kerr_model(p: &SystemParams, levels: usize, fock_phonon: usize) -> Result<ModelRealization> {
    p.validate()?;
    if levels < 2 {
        return Err(Error::InvalidArgument("transmon needs at least two levels".into()));
    }
    check_fock(fock_phonon, "phonon")?;
    let space = make_space(&[levels, fock_phonon])?;
    let c = quantum::destroy(&space, QUBIT)?;
    let cd = c.dagger();
    let nc = &cd * &c;
    let b = quantum::destroy(&space, PHONON)?;
    let bd = b.dagger();
    let eps = p.drive();
    let mut h = &nc * (-p.delta_q);
    h = &h + &(&(&(&cd * &cd) * &(&c * &c)) * (p.alpha_anh / 2.0));
    h = &h + &(&(&bd * &b) * (-p.delta_b));
    h = &h + &(&(&(&bd * &c) + &(&b * &cd)) * p.g_qb);
    h = &h + &(&(&cd * eps) + &(&c * eps.conj()));
    hermitian_or_err(&h)?;
    let collapses = vec![(b, p.gamma_b), (c, p.gamma_1), (nc, 2.0 * p.gamma_phi)];
    Ok(ModelRealization {
        h,
        collapses,
        space,
        variant: Variant::Kerr { levels },
        displacement: C64::new(0.0, 0.0),
    })
}

/// Coherent amplitude a bare phonon mode reaches under drive ε_b.
pub fn phonon_drive_displacement(p: &SystemParams, eps_b: f64) -> C64 {
    C64::new(eps_b, 0.0) / C64::new(p.delta_b, p.gamma_b / 2.0)
}

/// Simplified model plus ε_b(b + b†), with the qubit drive off.
///
/// Written in the frame displaced by β = ε_b/(Δ_b + iγ_b/2), where the phonon
/// drive is cancelled and the qubit sees the drive g·β instead. This is an
/// exact rewrite; it only moves the Fock cut-off to the fluctuations.
pub fn phonon_drive_model(p: &SystemParams, eps_b: f64, fock_phonon: usize) -> Result<ModelRealization> {
    p.validate()?;
    check_fock(fock_phonon, "phonon")?;
    if p.gamma_b <= 0.0 && p.delta_b == 0.0 {
        return Err(Error::InvalidArgument("resonant phonon drive without damping has no steady state".into()));
    }
    let beta = phonon_drive_displacement(p, eps_b);
    let space = make_space(&[2, fock_phonon])?;
    let sm = quantum::sigma_minus(&space, QUBIT)?;
    let sp = sm.dagger();
    let sz = quantum::sigma_z(&space, QUBIT)?;
    let b = quantum::destroy(&space, PHONON)?;
    let bd = b.dagger();
    let mut h = &sz * (-p.delta_q / 2.0);
    h = &h + &(&(&bd * &b) * (-p.delta_b));
    h = &h + &(&(&(&bd * &sm) + &(&b * &sp)) * p.g_qb);
    let qd = beta * p.g_qb;
    h = &h + &(&(&sp * qd) + &(&sm * qd.conj()));
    hermitian_or_err(&h)?;
    let collapses = vec![(b, p.gamma_b), (sm, p.gamma_1), (sz, p.gamma_phi / 2.0)];
    Ok(ModelRealization { h, collapses, space, variant: Variant::PhononDrive, displacement: beta })
}

/// ε_d = sqrt(10^((P + δ)/10)).
pub fn calibrate_drive(p_dbm: f64, delta_db: f64) -> f64 {
    10f64.powf((p_dbm + delta_db) / 20.0)
}

pub fn build(p: &SystemParams, variant: &Variant, fock_phonon: usize, fock_cavity: usize) -> Result<ModelRealization> {
    match variant {
        Variant::Full => full_model(p, fock_phonon, fock_cavity),
        Variant::Effective => Ok(effective_model(p, fock_phonon)?.realization),
        Variant::Simplified => simplified_model(p, fock_phonon),
        Variant::Kerr { levels } => kerr_model(p, *levels, fock_phonon),
        Variant::PhononDrive => Err(Error::InvalidArgument("phonon-drive variant needs an explicit eps_b".into())),
    }
}

/// Top-5-level phonon population allowed before the truncation is grown.
pub const TAIL_TOL: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct AdaptiveSolution {
    pub realization: ModelRealization,
    pub state: DensityMatrix,
    pub fock_phonon: usize,
    pub tail: f64,
}

/// Steady state with the phonon cut-off grown by 25% until the top five
/// levels hold less than [`TAIL_TOL`], up to `cap` levels.
pub fn adaptive_steady_state<F>(build: F, start: usize, cap: usize) -> Result<AdaptiveSolution>
where
    F: Fn(usize) -> Result<ModelRealization>,
{
    let mut n = start.max(6);
    loop {
        let m = build(n)?;
        let rho = m.steady_state()?;
        let tail = quantum::top_level_population(&rho, PHONON, 5);
        if tail < TAIL_TOL {
            return Ok(AdaptiveSolution { realization: m, state: rho, fock_phonon: n, tail });
        }
        if n >= cap {
            return Err(Error::Truncation(format!(
                "phonon tail {tail:.2e} still above {TAIL_TOL:.0e} at the cap of {cap} levels"
            )));
        }
        n = ((n as f64 * 1.25).ceil() as usize).min(cap);
    }
}

/// Reference single-slot matrix for documentation and tests: bare transmon ladder.
pub fn transmon_levels(delta_q: f64, alpha: f64, levels: usize) -> Vec<f64> {
    let n = local::number(levels);
    (0..levels).map(|k| -delta_q * n[(k, k)].re + alpha / 2.0 * (k as f64) * (k as f64 - 1.0)).collect()
}
