//! Simulation and analysis of a driven transmon that is dispersively read out
//! through a cavity and resonantly coupled to a bulk acoustic phonon mode.
//!
//! Frequencies and rates are angular, in rad/µs; times are in µs. Subsystems
//! are always ordered (qubit, phonon[, cavity]) and level 0 is the ground state.

pub mod error;
pub mod fit;
pub mod lindblad;
pub mod meanfield;
pub mod models;
pub mod observables;
pub mod quantum;
pub mod sparse;
pub mod spectroscopy;
pub mod validate;

pub use error::{Error, Result};
pub use lindblad::{
    build_liouvillian, evolve, regression_spectrum, steady_state, EvolveOptions, Liouvillian, Spectrum,
    TimeTrace,
};
pub use quantum::{
    destroy, embed, expectation, make_space, make_state, partial_trace, DensityMatrix, HilbertSpace, Operator,
    SlotState,
};

pub type C64 = num_complex::Complex64;

/// 2π, for converting MHz to rad/µs.
pub const TAU: f64 = std::f64::consts::TAU;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
