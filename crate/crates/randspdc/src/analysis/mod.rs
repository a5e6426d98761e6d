//! Observables derived from a two-photon amplitude: Schmidt decomposition
//! and entanglement measures, temporal amplitudes and photon fluxes,
//! Hong-Ou-Mandel and Franson interferograms.

mod interference;
mod schmidt;
mod temporal;

pub use interference::{
    franson_rate, fringe_orientation_deg, hom_rate, FransonPattern, HomPattern,
};
pub use schmidt::{cooperativity, entropy, schmidt_decompose, SchmidtResult};
pub use temporal::{
    photon_flux, temporal_amplitude, weighted_spectral_norm, PhotonFlux, TemporalAmplitude,
};
