//! Schmidt decomposition of the two-photon amplitude and the entanglement
//! measures built on its weights.

use crate::spdc::{trapezoid_weights, FrequencyGrid, TwoPhotonAmplitude};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Schmidt decomposition phi = norm * sum_n lambda_n f_sn(ws) f_in(wi)
/// with sum lambda_n^2 = 1 and the modes orthonormal under the grid
/// quadrature.
#[derive(Debug, Clone)]
pub struct SchmidtResult {
    /// Weights lambda_n^2, descending, summing to 1.
    pub weights: Vec<f64>,
    /// Amplitudes lambda_n = sqrt(weights).
    pub amplitudes: Vec<f64>,
    /// Signal mode samples f_sn on the signal grid, one vector per mode.
    pub signal_modes: Vec<Vec<Complex64>>,
    /// Idler mode samples f_in on the idler grid.
    pub idler_modes: Vec<Vec<Complex64>>,
    /// Quadrature norm of the decomposed amplitude.
    pub norm: f64,
    pub grid: FrequencyGrid,
}

impl SchmidtResult {
    /// Rebuild phi at one grid point from all retained modes.
    pub fn reconstruct(&self, i_s: usize, i_i: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 0..self.amplitudes.len() {
            acc += self.amplitudes[n] * self.signal_modes[n][i_s] * self.idler_modes[n][i_i];
        }
        self.norm * acc
    }
}

/// Decompose the quadrature-weighted amplitude matrix by SVD.
pub fn schmidt_decompose(tpa: &TwoPhotonAmplitude) -> Result<SchmidtResult> {
    let n_s = tpa.n_s();
    let n_i = tpa.n_i();
    let w_s = trapezoid_weights(n_s, tpa.grid.d_omega_s());
    let w_i = trapezoid_weights(n_i, tpa.grid.d_omega_i());
    let sq_s: Vec<f64> = w_s.iter().map(|w| w.sqrt()).collect();
    let sq_i: Vec<f64> = w_i.iter().map(|w| w.sqrt()).collect();

    let weighted = DMatrix::from_fn(n_s, n_i, |i, j| sq_s[i] * tpa.at(i, j) * sq_i[j]);
    if weighted.iter().all(|v| v.norm() == 0.0) {
        return Err(Error::Numerical(
            "cannot decompose an identically zero amplitude".into(),
        ));
    }
    let svd = weighted.svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^H");

    // Order the singular values descending and keep the full rank.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();
    let norm = total.sqrt();
    let mut weights = Vec::with_capacity(order.len());
    let mut amplitudes = Vec::with_capacity(order.len());
    let mut signal_modes = Vec::with_capacity(order.len());
    let mut idler_modes = Vec::with_capacity(order.len());
    for &n in &order {
        let s = svd.singular_values[n];
        weights.push(s * s / total);
        amplitudes.push(s / norm);
        signal_modes.push((0..n_s).map(|i| u[(i, n)] / sq_s[i]).collect());
        idler_modes.push((0..n_i).map(|j| v_t[(n, j)] / sq_i[j]).collect());
    }
    Ok(SchmidtResult {
        weights,
        amplitudes,
        signal_modes,
        idler_modes,
        norm,
        grid: tpa.grid.clone(),
    })
}

/// Entropy of entanglement S = -sum lambda_n^2 log2 lambda_n^2, bits.
pub fn entropy(schmidt: &SchmidtResult) -> f64 {
    schmidt
        .weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.log2())
        .sum()
}

/// Cooperativity K = 1 / sum lambda_n^4.
pub fn cooperativity(schmidt: &SchmidtResult) -> f64 {
    let s: f64 = schmidt.weights.iter().map(|w| w * w).sum();
    1.0 / s
}
