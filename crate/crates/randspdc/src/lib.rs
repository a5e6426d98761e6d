//! Photon-pair generation in random 1D nonlinear layered structures.
//!
//! The crate builds random dielectric stacks out of a nonlinear material
//! (LiNbO3) and a linear filler (SiO2), solves their linear optics with a
//! transfer-matrix method, constructs the joint spectral amplitude of
//! photon pairs created by spontaneous parametric down-conversion inside
//! the stack, and derives pair observables from it: Schmidt spectra,
//! entanglement entropy, cooperativity, temporal amplitudes and photon
//! fluxes, Hong-Ou-Mandel dips and Franson interferograms. A seeded
//! Monte Carlo harness produces ensemble statistics of transmission peaks
//! and localization lengths and searches for structures with prescribed
//! resonance patterns.
//!
//! Units used throughout: lengths in micrometers, times in femtoseconds,
//! angular frequencies in rad/fs, angles in radians.

pub mod analysis;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod localization;
pub mod material;
pub mod peaks;
pub mod spdc;
pub mod stack;
pub mod transfer;

pub use error::{Error, Result};

/// Speed of light in vacuum, micrometers per femtosecond.
pub const C_UM_PER_FS: f64 = 0.299792458;

/// Reduced Planck constant in eV fs, used when spectra are wanted in eV.
pub const HBAR_EV_FS: f64 = 0.6582119569;

/// Convert a vacuum wavelength in micrometers to angular frequency in rad/fs.
pub fn omega_from_lambda_um(lambda_um: f64) -> f64 {
    2.0 * std::f64::consts::PI * C_UM_PER_FS / lambda_um
}

/// Convert an angular frequency in rad/fs to vacuum wavelength in micrometers.
pub fn lambda_um_from_omega(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * C_UM_PER_FS / omega
}
