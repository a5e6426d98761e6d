//! Hong-Ou-Mandel and Franson coincidence interferograms.

use crate::spdc::{trapezoid_weights, TwoPhotonAmplitude};
use crate::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Normalized Hong-Ou-Mandel coincidence rate versus the relative delay.
#[derive(Debug, Clone)]
pub struct HomPattern {
    pub tau_fs: Vec<f64>,
    /// R_n in [0, 2]; 1 far outside the dip.
    pub rate: Vec<f64>,
}

/// Normalized Hong-Ou-Mandel rate R_n(tau) = 1 - rho(tau), where rho is
/// the omega_s omega_i weighted overlap of phi with its frequency-swapped
/// self. Needs a square grid so the swap is exact.
pub fn hom_rate(tpa: &TwoPhotonAmplitude, tau_fs: &[f64]) -> Result<HomPattern> {
    if !tpa.grid.is_square() {
        return Err(Error::InvalidParameter(
            "HOM rate needs a square grid; resample the amplitude first".into(),
        ));
    }
    let n = tpa.n_s();
    let w = trapezoid_weights(n, tpa.grid.d_omega_s());
    let omega = &tpa.grid.omega_s;

    let mut r00 = 0.0;
    for j in 0..n {
        for k in 0..n {
            r00 += w[j] * w[k] * omega[j] * omega[k] * tpa.at(j, k).norm_sqr();
        }
    }
    if r00 <= 0.0 {
        return Err(Error::Numerical("zero-norm amplitude in HOM rate".into()));
    }

    // The swap kernel only depends on omega_j - omega_k, so collapse the
    // double integral onto diagonals once and sweep the delays in O(n).
    let mut diag = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    for j in 0..n {
        for k in 0..n {
            let cross = tpa.at(j, k) * tpa.at(k, j).conj();
            diag[n - 1 + j - k] += w[j] * w[k] * omega[j] * omega[k] * cross;
        }
    }
    let d_omega = tpa.grid.d_omega_s();
    let rate = tau_fs
        .iter()
        .map(|&tau| {
            let mut rho = 0.0;
            for (d, s) in diag.iter().enumerate() {
                let delta = (d as f64 - (n - 1) as f64) * d_omega;
                rho += (s * Complex64::new(0.0, -delta * tau).exp()).re;
            }
            1.0 - rho / r00
        })
        .collect();
    Ok(HomPattern {
        tau_fs: tau_fs.to_vec(),
        rate,
    })
}

/// Normalized Franson coincidence rate on a (tau_s, tau_i) grid.
#[derive(Debug, Clone)]
pub struct FransonPattern {
    pub tau_s_fs: Vec<f64>,
    pub tau_i_fs: Vec<f64>,
    /// Row-major over (tau_s, tau_i); 1 at zero delays, 1/4 far out.
    pub rate: Vec<f64>,
}

impl FransonPattern {
    pub fn at(&self, i_s: usize, i_i: usize) -> f64 {
        self.rate[i_s * self.tau_i_fs.len() + i_i]
    }
}

/// R_n^F(ts, ti) = 1/4 + Re{2R(ts,0) + 2R(0,ti) + R(ts,ti) + R(ts,-ti)}
/// / (8 R(0,0)), with R the omega_s omega_i weighted Fourier transform of
/// the joint spectral intensity.
pub fn franson_rate(
    tpa: &TwoPhotonAmplitude,
    tau_s_fs: &[f64],
    tau_i_fs: &[f64],
) -> Result<FransonPattern> {
    let n_s = tpa.n_s();
    let n_i = tpa.n_i();
    let w_s = trapezoid_weights(n_s, tpa.grid.d_omega_s());
    let w_i = trapezoid_weights(n_i, tpa.grid.d_omega_i());

    // Weighted joint intensity.
    let p = |j: usize, k: usize| -> f64 {
        w_s[j] * w_i[k] * tpa.grid.omega_s[j] * tpa.grid.omega_i[k] * tpa.at(j, k).norm_sqr()
    };

    // Idler-axis partial sums for +tau_i, -tau_i, and 0.
    let n_t_i = tau_i_fs.len();
    let mut a_plus = vec![Complex64::new(0.0, 0.0); n_s * n_t_i];
    let mut a_minus = vec![Complex64::new(0.0, 0.0); n_s * n_t_i];
    let mut a_zero = vec![0.0; n_s];
    for j in 0..n_s {
        for k in 0..n_i {
            let pjk = p(j, k);
            a_zero[j] += pjk;
            for (q, &tau) in tau_i_fs.iter().enumerate() {
                let ph = Complex64::new(0.0, -tpa.grid.omega_i[k] * tau).exp();
                a_plus[j * n_t_i + q] += pjk * ph;
                a_minus[j * n_t_i + q] += pjk * ph.conj();
            }
        }
    }
    let r00: f64 = a_zero.iter().sum();
    if r00 <= 0.0 {
        return Err(Error::Numerical(
            "zero-norm amplitude in Franson rate".into(),
        ));
    }
    let r_0_ti: Vec<Complex64> = (0..n_t_i)
        .map(|q| (0..n_s).map(|j| a_plus[j * n_t_i + q]).sum())
        .collect();

    let mut rate = Vec::with_capacity(tau_s_fs.len() * n_t_i);
    for &tau_s in tau_s_fs {
        let e_s: Vec<Complex64> = tpa
            .grid
            .omega_s
            .iter()
            .map(|&o| Complex64::new(0.0, -o * tau_s).exp())
            .collect();
        let r_ts_0: Complex64 = (0..n_s).map(|j| a_zero[j] * e_s[j]).sum();
        for q in 0..n_t_i {
            let mut r_pp = Complex64::new(0.0, 0.0);
            let mut r_pm = Complex64::new(0.0, 0.0);
            for j in 0..n_s {
                r_pp += e_s[j] * a_plus[j * n_t_i + q];
                r_pm += e_s[j] * a_minus[j * n_t_i + q];
            }
            let re = (2.0 * r_ts_0 + 2.0 * r_0_ti[q] + r_pp + r_pm).re;
            rate.push(0.25 + re / (8.0 * r00));
        }
    }
    Ok(FransonPattern {
        tau_s_fs: tau_s_fs.to_vec(),
        tau_i_fs: tau_i_fs.to_vec(),
        rate,
    })
}

/// Orientation of the dominant fringe system of a Franson pattern, deg in
/// [0, 180): the angle of the strongest nonzero 2D Fourier component in
/// the (frequency over tau_s, frequency over tau_i) plane. Diagonal
/// fringes varying with tau_s + tau_i come out at 45 degrees.
pub fn fringe_orientation_deg(pattern: &FransonPattern) -> f64 {
    let n_s = pattern.tau_s_fs.len();
    let n_i = pattern.tau_i_fs.len();
    let mean = pattern.rate.iter().sum::<f64>() / pattern.rate.len() as f64;
    let mut field: Vec<Complex64> = pattern
        .rate
        .iter()
        .map(|&r| Complex64::new(r - mean, 0.0))
        .collect();

    let mut planner = FftPlanner::new();
    let fft_i = planner.plan_fft_forward(n_i);
    for row in field.chunks_mut(n_i) {
        fft_i.process(row);
    }
    let fft_s = planner.plan_fft_forward(n_s);
    let mut col = vec![Complex64::new(0.0, 0.0); n_s];
    let mut spectrum = vec![0.0; n_s * n_i];
    for q in 0..n_i {
        for j in 0..n_s {
            col[j] = field[j * n_i + q];
        }
        fft_s.process(&mut col);
        for j in 0..n_s {
            spectrum[j * n_i + q] = col[j].norm_sqr();
        }
    }

    let d_s = pattern.tau_s_fs[1] - pattern.tau_s_fs[0];
    let d_i = pattern.tau_i_fs[1] - pattern.tau_i_fs[0];
    let mut best = (0.0f64, 0.0f64, f64::MIN);
    for j in 0..n_s {
        for q in 0..n_i {
            if j == 0 && q == 0 {
                continue;
            }
            // Signed frequencies, cycles/fs.
            let f_s = if j <= n_s / 2 { j as f64 } else { j as f64 - n_s as f64 }
                / (n_s as f64 * d_s);
            let f_i = if q <= n_i / 2 { q as f64 } else { q as f64 - n_i as f64 }
                / (n_i as f64 * d_i);
            if spectrum[j * n_i + q] > best.2 {
                best = (f_s, f_i, spectrum[j * n_i + q]);
            }
        }
    }
    let mut deg = best.0.atan2(best.1).to_degrees();
    if deg < 0.0 {
        deg += 180.0;
    }
    if deg >= 180.0 {
        deg -= 180.0;
    }
    deg
}
