//! Coherent superpositions of two-photon amplitudes: equidistant pinholes
//! shifting the amplitude along the frequency diagonal, and integration
//! over a range of signal emission angles with a compensating phase.

use super::{
    two_photon_amplitude, EmissionGeometry, FrequencyGrid, Normalization, PumpConfig,
    TwoPhotonAmplitude,
};
use crate::stack::LayerStack;
use crate::transfer::transmittance_at;
use crate::{Error, Result};
use num_complex::Complex64;

/// Superposition recipe for [`superpose_pinholes`] /
/// [`superpose_angular_range`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum SuperpositionSpec {
    /// M equidistant pinholes: Phi(ws, wi) = sum_n exp(i n phase_step) *
    /// phi(ws + n delta_omega, wi + n delta_omega).
    Pinholes {
        m: usize,
        /// Central-frequency spacing of adjacent pinholes, rad/fs; must be
        /// a whole number of grid steps.
        delta_omega: f64,
        /// Phase difference between adjacent pinhole amplitudes, rad.
        phase_step: f64,
    },
    /// Signal emission angles integrated over [theta_min, theta_max].
    AngularRange {
        theta_min: f64,
        theta_max: f64,
        n_angles: usize,
    },
}

fn snap_steps(delta_omega: f64, d: f64, axis: &str) -> Result<usize> {
    let k = (delta_omega / d).round();
    if k < 1.0 || (k * d - delta_omega).abs() > 1e-9 * delta_omega {
        return Err(Error::InvalidParameter(format!(
            "pinhole spacing {delta_omega} rad/fs is not a whole number of {axis} grid steps"
        )));
    }
    Ok(k as usize)
}

/// Evaluate the pinhole superposition. The grid is extended on the
/// low-frequency side so every shifted copy stays on it; the result keeps
/// the input's declared normalization.
pub fn superpose_pinholes(
    tpa: &TwoPhotonAmplitude,
    spec: &SuperpositionSpec,
) -> Result<TwoPhotonAmplitude> {
    let (m, delta_omega, phase_step) = match spec {
        SuperpositionSpec::Pinholes {
            m,
            delta_omega,
            phase_step,
        } => (*m, *delta_omega, *phase_step),
        SuperpositionSpec::AngularRange { .. } => {
            return Err(Error::InvalidParameter(
                "superpose_pinholes needs a pinhole spec".into(),
            ))
        }
    };
    if m < 1 {
        return Err(Error::InvalidParameter("pinhole count must be >= 1".into()));
    }
    if m == 1 {
        return Ok(tpa.clone());
    }
    if !(delta_omega > 0.0) {
        return Err(Error::InvalidParameter(
            "pinhole spacing must be > 0".into(),
        ));
    }
    let k_s = snap_steps(delta_omega, tpa.grid.d_omega_s(), "signal")?;
    let k_i = snap_steps(delta_omega, tpa.grid.d_omega_i(), "idler")?;
    let pad_s = (m - 1) * k_s;
    let pad_i = (m - 1) * k_i;
    let n_s = tpa.n_s() + pad_s;
    let n_i = tpa.n_i() + pad_i;
    let extend = |axis: &[f64], d: f64, pad: usize, n: usize| -> Vec<f64> {
        (0..n)
            .map(|p| axis[0] + (p as f64 - pad as f64) * d)
            .collect()
    };
    let grid = FrequencyGrid {
        omega_s: extend(&tpa.grid.omega_s, tpa.grid.d_omega_s(), pad_s, n_s),
        omega_i: extend(&tpa.grid.omega_i, tpa.grid.d_omega_i(), pad_i, n_i),
    };

    let mut values = vec![Complex64::new(0.0, 0.0); n_s * n_i];
    for p in 0..n_s {
        for q in 0..n_i {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..m {
                let i_s = p as isize - pad_s as isize + (n * k_s) as isize;
                let i_i = q as isize - pad_i as isize + (n * k_i) as isize;
                if i_s < 0
                    || i_i < 0
                    || i_s >= tpa.n_s() as isize
                    || i_i >= tpa.n_i() as isize
                {
                    continue;
                }
                let phase = Complex64::new(0.0, phase_step * n as f64).exp();
                acc += phase * tpa.at(i_s as usize, i_i as usize);
            }
            values[p * n_i + q] = acc;
        }
    }

    // Each copy n lowers the pump sum by 2 n delta_omega; the union of
    // copies is centered on the midpoint.
    let omega_p0 = tpa.omega_p0 - (m - 1) as f64 * delta_omega;
    let out = TwoPhotonAmplitude {
        grid,
        values,
        normalization: Normalization::Physical,
        omega_p0,
        coarse_grid: tpa.coarse_grid,
    };
    match tpa.normalization {
        Normalization::Physical => Ok(out),
        Normalization::Paper => out.into_paper_normalized(),
    }
}

/// Result of an angular-range superposition.
#[derive(Debug, Clone)]
pub struct AngularSuperposition {
    pub amplitude: TwoPhotonAmplitude,
    /// Fitted compensation phase slope d(phase)/d(theta_s), rad/rad.
    pub compensation_slope: f64,
}

/// Hermitian inner product of two amplitudes under the grid quadrature.
fn overlap(a: &TwoPhotonAmplitude, b: &TwoPhotonAmplitude) -> Complex64 {
    let ws = super::trapezoid_weights(a.n_s(), a.grid.d_omega_s());
    let wi = super::trapezoid_weights(a.n_i(), a.grid.d_omega_i());
    let mut acc = Complex64::new(0.0, 0.0);
    for i_s in 0..a.n_s() {
        let mut row = Complex64::new(0.0, 0.0);
        for i_i in 0..a.n_i() {
            row += wi[i_i] * a.at(i_s, i_i).conj() * b.at(i_s, i_i);
        }
        acc += ws[i_s] * row;
    }
    acc
}

/// Integrate the two-photon amplitude over signal angles in
/// [theta_min, theta_max] with a linear-in-theta compensation phase fitted
/// to make the contributions add constructively (the wedge-prism role).
/// Errors if the transmission peak feeding the pair emission vanishes at
/// any sampled angle.
pub fn superpose_angular_range(
    stack: &LayerStack,
    pump: &PumpConfig,
    spec: &SuperpositionSpec,
    grid: &FrequencyGrid,
) -> Result<AngularSuperposition> {
    let (theta_min, theta_max, n_angles) = match spec {
        SuperpositionSpec::AngularRange {
            theta_min,
            theta_max,
            n_angles,
        } => (*theta_min, *theta_max, *n_angles),
        SuperpositionSpec::Pinholes { .. } => {
            return Err(Error::InvalidParameter(
                "superpose_angular_range needs an angular-range spec".into(),
            ))
        }
    };
    if theta_max < theta_min {
        return Err(Error::InvalidParameter(
            "theta_max must be >= theta_min".into(),
        ));
    }
    if theta_max == theta_min {
        let amplitude =
            two_photon_amplitude(stack, pump, &EmissionGeometry::new(theta_min), grid)?;
        return Ok(AngularSuperposition {
            amplitude,
            compensation_slope: 0.0,
        });
    }
    if n_angles < 32 {
        return Err(Error::InvalidParameter(
            "angular superposition needs at least 32 angles".into(),
        ));
    }

    let thetas: Vec<f64> = (0..n_angles)
        .map(|j| theta_min + (theta_max - theta_min) * j as f64 / (n_angles - 1) as f64)
        .collect();
    const PEAK_FLOOR: f64 = 0.05;
    let mut parts = Vec::with_capacity(n_angles);
    for &theta in &thetas {
        let max_t = grid
            .omega_s
            .iter()
            .map(|&w| transmittance_at(stack, w, theta))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if max_t < PEAK_FLOOR {
            return Err(Error::PeakLost { theta_rad: theta });
        }
        parts.push(two_photon_amplitude(
            stack,
            pump,
            &EmissionGeometry::new(theta),
            grid,
        )?);
    }

    let d_theta = thetas[1] - thetas[0];
    let mut w_theta = vec![d_theta; n_angles];
    w_theta[0] = 0.5 * d_theta;
    w_theta[n_angles - 1] = 0.5 * d_theta;

    // Gram matrix of the contributions under the grid quadrature.
    let mut gram = vec![Complex64::new(0.0, 0.0); n_angles * n_angles];
    for j in 0..n_angles {
        for k in 0..=j {
            let g = overlap(&parts[k], &parts[j]);
            gram[j * n_angles + k] = g.conj();
            gram[k * n_angles + j] = g;
        }
    }
    // Norm of the compensated sum as a function of the phase slope c.
    let objective = |c: f64| -> f64 {
        let mut acc = 0.0;
        for j in 0..n_angles {
            for k in 0..n_angles {
                let rot = Complex64::new(0.0, c * (thetas[j] - thetas[k])).exp();
                acc += (w_theta[j] * w_theta[k] * rot * gram[k * n_angles + j]).re;
            }
        }
        acc
    };
    // Seed the slope from the mean phase increment between adjacent
    // angles, then scan one aliasing period and polish the best sample.
    let mut increment = Complex64::new(0.0, 0.0);
    for j in 1..n_angles {
        increment += overlap(&parts[j - 1], &parts[j]);
    }
    let c_seed = -increment.arg() / d_theta;
    let period = 2.0 * std::f64::consts::PI / d_theta;
    let scan = 512;
    let mut best = (c_seed, objective(c_seed));
    for s in 0..=scan {
        let c = c_seed - 0.5 * period + period * s as f64 / scan as f64;
        let v = objective(c);
        if v > best.1 {
            best = (c, v);
        }
    }
    let mut lo = best.0 - period / scan as f64;
    let mut hi = best.0 + period / scan as f64;
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if objective(m1) < objective(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let slope = 0.5 * (lo + hi);

    let n_s = grid.omega_s.len();
    let n_i = grid.omega_i.len();
    let mut values = vec![Complex64::new(0.0, 0.0); n_s * n_i];
    let mut coarse = false;
    for (j, part) in parts.iter().enumerate() {
        let rot = w_theta[j] * Complex64::new(0.0, slope * thetas[j]).exp();
        for (v, p) in values.iter_mut().zip(&part.values) {
            *v += rot * p;
        }
        coarse |= part.coarse_grid;
    }
    Ok(AngularSuperposition {
        amplitude: TwoPhotonAmplitude {
            grid: grid.clone(),
            values,
            normalization: Normalization::Physical,
            omega_p0: pump.omega_p0,
            coarse_grid: coarse,
        },
        compensation_slope: slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::Material;
    use crate::stack::{Layer, LayerStack};
    use crate::omega_from_lambda_um;

    fn gaussian_blob(center: f64, sigma: f64, half_span: f64, n: usize) -> TwoPhotonAmplitude {
        let grid = FrequencyGrid::degenerate(center, half_span, n).unwrap();
        let mut values = Vec::new();
        for &w_s in &grid.omega_s {
            for &w_i in &grid.omega_i {
                let g = (-((w_s - center).powi(2) + (w_i - center).powi(2))
                    / (2.0 * sigma * sigma))
                    .exp();
                values.push(Complex64::new(g, 0.0));
            }
        }
        TwoPhotonAmplitude {
            grid,
            values,
            normalization: Normalization::Physical,
            omega_p0: 2.0 * center,
            coarse_grid: false,
        }
    }

    #[test]
    fn single_pinhole_is_identity() {
        let tpa = gaussian_blob(1.88, 0.004, 0.03, 64);
        let spec = SuperpositionSpec::Pinholes {
            m: 1,
            delta_omega: 0.01,
            phase_step: 0.3,
        };
        let out = superpose_pinholes(&tpa, &spec).unwrap();
        assert_eq!(out.n_s(), tpa.n_s());
        for (a, b) in out.values.iter().zip(&tpa.values) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn disjoint_pinholes_scale_pair_number() {
        let tpa = gaussian_blob(1.88, 0.001, 0.02, 128);
        let d = tpa.grid.d_omega_s();
        let norm_in = tpa.norm_sq();
        for m in [2usize, 4] {
            // 40 grid steps is far beyond the blob support, so the copies
            // cannot interfere.
            let spec = SuperpositionSpec::Pinholes {
                m,
                delta_omega: 40.0 * d,
                phase_step: 0.0,
            };
            let out = superpose_pinholes(&tpa, &spec).unwrap();
            let ratio = out.norm_sq() / norm_in;
            assert!(
                (ratio - m as f64).abs() < 1e-9 * m as f64,
                "m = {m}: ratio = {ratio}"
            );
        }
    }

    #[test]
    fn pinhole_spacing_must_sit_on_the_grid() {
        let tpa = gaussian_blob(1.88, 0.004, 0.03, 64);
        let d = tpa.grid.d_omega_s();
        let spec = SuperpositionSpec::Pinholes {
            m: 2,
            delta_omega: 1.5 * d,
            phase_step: 0.0,
        };
        assert!(superpose_pinholes(&tpa, &spec).is_err());
    }

    #[test]
    fn pinholes_reject_angular_spec() {
        let tpa = gaussian_blob(1.88, 0.004, 0.03, 64);
        let spec = SuperpositionSpec::AngularRange {
            theta_min: 0.0,
            theta_max: 0.1,
            n_angles: 32,
        };
        assert!(superpose_pinholes(&tpa, &spec).is_err());
    }

    #[test]
    fn grid_extends_low_side_by_m_minus_one_shifts() {
        let tpa = gaussian_blob(1.88, 0.004, 0.03, 64);
        let d = tpa.grid.d_omega_s();
        let spec = SuperpositionSpec::Pinholes {
            m: 3,
            delta_omega: 5.0 * d,
            phase_step: 0.0,
        };
        let out = superpose_pinholes(&tpa, &spec).unwrap();
        assert_eq!(out.n_s(), 64 + 10);
        let expect_start = tpa.grid.omega_s[0] - 10.0 * d;
        assert!((out.grid.omega_s[0] - expect_start).abs() < 1e-12);
        // The top-right corner only sees the unshifted copy.
        let last = out.n_s() - 1;
        assert_eq!(out.at(last, last), tpa.at(63, 63));
    }

    fn index_matched_slab() -> LayerStack {
        LayerStack::from_layers(vec![Layer {
            material: Material::constant("slab", 1.0, 12.0),
            thickness_um: 30.0,
        }])
    }

    #[test]
    fn zero_width_range_equals_single_angle() {
        let stack = index_matched_slab();
        let omega0 = omega_from_lambda_um(1.0);
        let pump = PumpConfig::new(2.0 * omega0);
        let grid = FrequencyGrid::degenerate(omega0, 0.05, 64).unwrap();
        let spec = SuperpositionSpec::AngularRange {
            theta_min: 0.42,
            theta_max: 0.42,
            n_angles: 32,
        };
        let sup = superpose_angular_range(&stack, &pump, &spec, &grid).unwrap();
        let single =
            two_photon_amplitude(&stack, &pump, &EmissionGeometry::new(0.42), &grid).unwrap();
        for (a, b) in sup.amplitude.values.iter().zip(&single.values) {
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-30));
        }
        assert_eq!(sup.compensation_slope, 0.0);
    }

    #[test]
    fn compensation_makes_the_sum_constructive() {
        // Thin enough that the longitudinal overlap keeps its sign across
        // the angular range; a linear phase can then align all terms.
        let stack = LayerStack::from_layers(vec![Layer {
            material: Material::constant("slab", 1.0, 12.0),
            thickness_um: 8.0,
        }]);
        let omega0 = omega_from_lambda_um(1.0);
        let pump = PumpConfig::new(2.0 * omega0);
        let grid = FrequencyGrid::degenerate(omega0, 0.04, 64).unwrap();
        let (theta_min, theta_max) = (0.44, 0.46);
        let spec = SuperpositionSpec::AngularRange {
            theta_min,
            theta_max,
            n_angles: 32,
        };
        let sup = superpose_angular_range(&stack, &pump, &spec, &grid).unwrap();
        // Upper bound on the achievable center magnitude: incoherent sum
        // of the contributions' magnitudes there.
        let c = 32;
        let mut bound = 0.0;
        let mut uncompensated = Complex64::new(0.0, 0.0);
        let d_theta = (theta_max - theta_min) / 31.0;
        for j in 0..32 {
            let theta = theta_min + d_theta * j as f64;
            let w = if j == 0 || j == 31 { 0.5 } else { 1.0 } * d_theta;
            let part =
                two_photon_amplitude(&stack, &pump, &EmissionGeometry::new(theta), &grid).unwrap();
            bound += w * part.at(c, c).norm();
            uncompensated += w * part.at(c, c);
        }
        let got = sup.amplitude.at(c, c).norm();
        assert!(got >= 0.9 * bound, "got {got}, bound {bound}");
        assert!(
            got >= uncompensated.norm(),
            "compensation must not lose to the raw sum: {got} < {}",
            uncompensated.norm()
        );
    }

    #[test]
    fn lost_peak_is_reported_with_its_angle() {
        // A deep quarter-wave mirror blocks the whole window at normal
        // incidence.
        let hi = Material::constant("hi", 2.2, 5.0);
        let lo = Material::constant("lo", 1.4, 0.0);
        let mut layers = Vec::new();
        for _ in 0..25 {
            layers.push(Layer {
                material: hi.clone(),
                thickness_um: 1.0 / (4.0 * 2.2),
            });
            layers.push(Layer {
                material: lo.clone(),
                thickness_um: 1.0 / (4.0 * 1.4),
            });
        }
        let stack = LayerStack::from_layers(layers);
        let omega0 = omega_from_lambda_um(1.0);
        let pump = PumpConfig::new(2.0 * omega0);
        let grid = FrequencyGrid::degenerate(omega0, 0.02, 64).unwrap();
        let spec = SuperpositionSpec::AngularRange {
            theta_min: 0.0,
            theta_max: 0.05,
            n_angles: 32,
        };
        let err = superpose_angular_range(&stack, &pump, &spec, &grid).unwrap_err();
        assert!(matches!(err, Error::PeakLost { .. }));
    }
}
