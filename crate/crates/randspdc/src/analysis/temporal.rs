//! Temporal two-photon amplitude and photon fluxes.
//!
//! The transform follows the exp(-i omega t) convention with an overall
//! 1/(2 pi) prefactor and the sqrt(omega_s omega_i / omega_s0 omega_i0)
//! spectral weight; with that choice the temporal squared norm equals the
//! weighted spectral squared norm (Parseval). Times are evaluated directly
//! on the requested window, so the window and sampling density are free of
//! FFT period constraints.

use crate::spdc::{trapezoid_weights, PairPhoton, TwoPhotonAmplitude};
use crate::{Error, Result, HBAR_EV_FS};
use num_complex::Complex64;
use rayon::prelude::*;

/// Temporal two-photon amplitude on a uniform (t_s, t_i) grid.
#[derive(Debug, Clone)]
pub struct TemporalAmplitude {
    pub t_s_fs: Vec<f64>,
    pub t_i_fs: Vec<f64>,
    /// Row-major over (t_s, t_i).
    pub values: Vec<Complex64>,
    /// Central frequencies the spectral weight was referenced to, rad/fs.
    pub omega_s0: f64,
    pub omega_i0: f64,
    /// Set when a non-negligible share of the energy sits within 1% of
    /// the window edge, hinting at a clipped (aliased) amplitude.
    pub aliasing_warning: bool,
}

impl TemporalAmplitude {
    pub fn at(&self, i_s: usize, i_i: usize) -> Complex64 {
        self.values[i_s * self.t_i_fs.len() + i_i]
    }

    pub fn d_t_s(&self) -> f64 {
        self.t_s_fs[1] - self.t_s_fs[0]
    }

    pub fn d_t_i(&self) -> f64 {
        self.t_i_fs[1] - self.t_i_fs[0]
    }

    /// Squared norm under the time-grid Riemann sum.
    pub fn norm_sq(&self) -> f64 {
        let cell = self.d_t_s() * self.d_t_i();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell
    }

    /// Eq.-(10)-style scale factor turning the normalized amplitude into
    /// a physical field product, SI units, for a transverse area B.
    pub fn physical_prefactor(&self, b_um2: f64) -> f64 {
        const HBAR_J_S: f64 = 1.054571817e-34;
        const EPS0_F_M: f64 = 8.8541878128e-12;
        const C_M_S: f64 = 2.99792458e8;
        let omega_geo = (self.omega_s0 * 1e15 * self.omega_i0 * 1e15).sqrt();
        HBAR_J_S * omega_geo
            / (4.0 * std::f64::consts::PI * EPS0_F_M * C_M_S * b_um2 * 1e-12)
    }
}

/// Weighted spectral squared norm matched by the temporal norm:
/// integral of (omega_s omega_i / omega_s0 omega_i0) |phi|^2.
pub fn weighted_spectral_norm(tpa: &TwoPhotonAmplitude) -> f64 {
    let w_s = trapezoid_weights(tpa.n_s(), tpa.grid.d_omega_s());
    let w_i = trapezoid_weights(tpa.n_i(), tpa.grid.d_omega_i());
    let o_s0 = tpa.grid.center_s();
    let o_i0 = tpa.grid.center_i();
    let mut acc = 0.0;
    for (j, &o_s) in tpa.grid.omega_s.iter().enumerate() {
        for (k, &o_i) in tpa.grid.omega_i.iter().enumerate() {
            acc += w_s[j] * w_i[k] * (o_s * o_i) / (o_s0 * o_i0) * tpa.at(j, k).norm_sqr();
        }
    }
    acc
}

fn time_axis(window_fs: f64, n: usize) -> Vec<f64> {
    let dt = window_fs / n as f64;
    (0..n)
        .map(|m| (m as f64 + 0.5) * dt - 0.5 * window_fs)
        .collect()
}

/// Fraction of the marginal energy inside the outermost 1% of samples on
/// each side.
fn edge_energy_fraction(marginal: &[f64]) -> f64 {
    let total: f64 = marginal.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let band = (marginal.len() / 100).max(1);
    let edge: f64 = marginal[..band].iter().sum::<f64>()
        + marginal[marginal.len() - band..].iter().sum::<f64>();
    edge / total
}

/// Transform of the spectral amplitude onto a centered time window of
/// length `time_window_fs` sampled with `n_time` points per axis.
pub fn temporal_amplitude(
    tpa: &TwoPhotonAmplitude,
    time_window_fs: f64,
    n_time: usize,
) -> Result<TemporalAmplitude> {
    if !(time_window_fs > 0.0) {
        return Err(Error::InvalidParameter("time window must be > 0".into()));
    }
    if n_time < 16 {
        return Err(Error::InvalidParameter(
            "time grid needs at least 16 points".into(),
        ));
    }
    // A Riemann sum over the time grid only recovers the spectral norm if
    // the sampling resolves the full spectral bandwidth.
    let dt = time_window_fs / n_time as f64;
    for (n, d) in [
        (tpa.n_s(), tpa.grid.d_omega_s()),
        (tpa.n_i(), tpa.grid.d_omega_i()),
    ] {
        let bandwidth = n as f64 * d;
        if dt > std::f64::consts::PI / bandwidth {
            return Err(Error::InvalidParameter(format!(
                "time step {dt} fs undersamples the spectral bandwidth {bandwidth} rad/fs"
            )));
        }
    }

    let t_s = time_axis(time_window_fs, n_time);
    let t_i = time_axis(time_window_fs, n_time);
    let o_s0 = tpa.grid.center_s();
    let o_i0 = tpa.grid.center_i();
    let w_s = trapezoid_weights(tpa.n_s(), tpa.grid.d_omega_s());
    let w_i = trapezoid_weights(tpa.n_i(), tpa.grid.d_omega_i());

    // Stage 1: transform the idler axis. half[j][q] = sum_k W phi E.
    let kernel_i: Vec<Complex64> = t_i
        .iter()
        .flat_map(|&t| {
            tpa.grid
                .omega_i
                .iter()
                .map(move |&o| Complex64::new(0.0, -o * t).exp())
        })
        .collect();
    let n_i = tpa.n_i();
    let half: Vec<Vec<Complex64>> = (0..tpa.n_s())
        .into_par_iter()
        .map(|j| {
            let o_s = tpa.grid.omega_s[j];
            (0..n_time)
                .map(|q| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n_i {
                        let weight =
                            w_i[k] * (o_s * tpa.grid.omega_i[k] / (o_s0 * o_i0)).sqrt();
                        acc += weight * tpa.at(j, k) * kernel_i[q * n_i + k];
                    }
                    acc
                })
                .collect()
        })
        .collect();

    // Stage 2: transform the signal axis.
    let half = &half;
    let pref = 1.0 / (2.0 * std::f64::consts::PI);
    let values: Vec<Complex64> = t_s
        .par_iter()
        .flat_map_iter(|&t| {
            let kernel_s: Vec<Complex64> = tpa
                .grid
                .omega_s
                .iter()
                .enumerate()
                .map(|(j, &o)| w_s[j] * Complex64::new(0.0, -o * t).exp())
                .collect();
            (0..n_time).map(move |q| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, k) in kernel_s.iter().enumerate() {
                    acc += k * half[j][q];
                }
                pref * acc
            })
        })
        .collect();

    let mut marginal_s = vec![0.0; n_time];
    let mut marginal_i = vec![0.0; n_time];
    for m in 0..n_time {
        for q in 0..n_time {
            let p = values[m * n_time + q].norm_sqr();
            marginal_s[m] += p;
            marginal_i[q] += p;
        }
    }
    let aliasing_warning =
        edge_energy_fraction(&marginal_s) > 1e-3 || edge_energy_fraction(&marginal_i) > 1e-3;

    Ok(TemporalAmplitude {
        t_s_fs: t_s,
        t_i_fs: t_i,
        values,
        omega_s0: o_s0,
        omega_i0: o_i0,
        aliasing_warning,
    })
}

/// Photon flux of one field versus its own time: hbar omega0 times the
/// marginal of |phi(t_s, t_i)|^2 over the other time.
#[derive(Debug, Clone)]
pub struct PhotonFlux {
    pub t_fs: Vec<f64>,
    /// eV per fs per unit pair normalization.
    pub values: Vec<f64>,
}

pub fn photon_flux(temporal: &TemporalAmplitude, photon: PairPhoton) -> PhotonFlux {
    let (axis, omega0, d_other) = match photon {
        PairPhoton::Signal => (&temporal.t_s_fs, temporal.omega_s0, temporal.d_t_i()),
        PairPhoton::Idler => (&temporal.t_i_fs, temporal.omega_i0, temporal.d_t_s()),
    };
    let n_s = temporal.t_s_fs.len();
    let n_i = temporal.t_i_fs.len();
    let mut values = vec![0.0; axis.len()];
    for m in 0..n_s {
        for q in 0..n_i {
            let p = temporal.at(m, q).norm_sqr();
            match photon {
                PairPhoton::Signal => values[m] += p,
                PairPhoton::Idler => values[q] += p,
            }
        }
    }
    for v in &mut values {
        *v *= HBAR_EV_FS * omega0 * d_other;
    }
    PhotonFlux {
        t_fs: axis.clone(),
        values,
    }
}
