//! Angular correlation area of the idler photon around its central
//! emission direction.
//!
//! The signal direction is held at its central angle; candidate idler
//! directions are weighted by the pump transverse angular spectrum (a
//! Gaussian beam of 1/e^2 intensity diameter `a` smears the transverse
//! matching by exp(-q^2 a^2 / 8)) multiplied by the structure's angular
//! transmission profile at the idler frequency. The reported widths are
//! RMS values of the marginals in the radial and azimuthal declination
//! angles; a plane-wave pump drops the Gaussian factor, leaving the
//! transmission profile as the only limit.

use super::{EmissionGeometry, PumpConfig};
use crate::stack::LayerStack;
use crate::transfer::transmittance_at;
use crate::{Error, Result, C_UM_PER_FS};

/// RMS spread of the idler emission direction, rad.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CorrelationArea {
    pub sigma_radial_rad: f64,
    pub sigma_azimuthal_rad: f64,
}

struct WeightModel<'a> {
    stack: &'a LayerStack,
    omega_i0: f64,
    theta_i0: f64,
    /// exp(-q^2 a^2 / 8) coefficient; zero for a plane-wave pump.
    pump_coeff: f64,
    /// Polar-deviation bounds of the central transmission lobe, rad. Pass
    /// regions beyond the lobe belong to other localized modes and do not
    /// contribute to the correlation around the central direction.
    lobe: (f64, f64),
}

impl WeightModel<'_> {
    /// Weight of the idler direction declined by `u` (radial, in the
    /// emission plane) and `v` (azimuthal, out of plane).
    fn weight(&self, u: f64, v: f64) -> Result<f64> {
        let su = (self.theta_i0 + u).sin();
        let (sv, cv) = v.sin_cos();
        // Transverse direction cosines of the declined idler.
        let tx = su * cv;
        let ty = sv;
        let s = tx.hypot(ty);
        if s >= 1.0 {
            return Ok(0.0);
        }
        let theta = s.asin();
        let d_theta = theta - self.theta_i0.abs();
        if d_theta < self.lobe.0 || d_theta > self.lobe.1 {
            return Ok(0.0);
        }
        let t = transmittance_at(self.stack, self.omega_i0, theta)?;
        if self.pump_coeff == 0.0 {
            return Ok(t);
        }
        // Residual transverse mismatch against the fixed signal.
        let k = self.omega_i0 / C_UM_PER_FS;
        let qx = k * (tx - self.theta_i0.sin());
        let qy = k * ty;
        let q2 = qx * qx + qy * qy;
        Ok(t * (-self.pump_coeff * q2).exp())
    }
}

// The lobe is cut at half maximum: resonances have Lorentzian-like
// angular tails whose second moment would otherwise be dominated by the
// truncation radius instead of the peak itself.
const LOBE_FLOOR: f64 = 0.5;

/// Distance from the lobe center to where the angular transmission first
/// falls below `LOBE_FLOOR` times its central value, searched in the
/// direction `sign`.
fn lobe_edge(
    stack: &LayerStack,
    omega: f64,
    theta0: f64,
    t0: f64,
    sign: f64,
) -> Result<f64> {
    let floor = LOBE_FLOOR * t0;
    let mut prev = 0.0;
    let mut r = 1e-6;
    while r < 0.5 {
        let theta = theta0 + sign * r;
        let t = if theta.abs() < std::f64::consts::FRAC_PI_2 {
            transmittance_at(stack, omega, theta)?
        } else {
            0.0
        };
        if t < floor {
            // Bisect the crossing between prev and r.
            let (mut lo, mut hi) = (prev, r);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                let tm = transmittance_at(stack, omega, theta0 + sign * mid)?;
                if tm < floor {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        prev = r;
        r *= 1.3;
    }
    Ok(0.5)
}

fn rms(xs: &[f64], ws: &[f64]) -> f64 {
    let total: f64 = ws.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mean: f64 = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / total;
    let var: f64 = xs
        .iter()
        .zip(ws)
        .map(|(x, w)| w * (x - mean) * (x - mean))
        .sum::<f64>()
        / total;
    var.sqrt()
}

/// Expand a symmetric scan range along one axis until the weight at its
/// edges is negligible against the profile maximum.
fn axis_range(model: &WeightModel, radial: bool) -> Result<f64> {
    let mut r = 1e-4;
    loop {
        let n = 401;
        let mut max = 0.0;
        let mut edge = 0.0;
        let mut second_moment = 0.0;
        let mut mass = 0.0;
        for k in 0..n {
            let x = -r + 2.0 * r * k as f64 / (n - 1) as f64;
            let w = if radial {
                model.weight(x, 0.0)?
            } else {
                model.weight(0.0, x)?
            };
            max = w.max(max);
            if k == 0 || k == n - 1 {
                edge = w.max(edge);
            }
            second_moment += w * x * x;
            mass += w;
        }
        let sigma = if mass > 0.0 {
            (second_moment / mass).sqrt()
        } else {
            0.0
        };
        let covered = max > 0.0 && edge <= 1e-4 * max && r >= 6.0 * sigma;
        if covered || r >= 0.6 {
            return Ok(r);
        }
        r *= 2.0;
    }
}

/// RMS angular correlation area of the idler for a pair emitted at the
/// signal frequency `omega_s0` (idler at omega_p0 - omega_s0).
pub fn correlation_area(
    stack: &LayerStack,
    pump: &PumpConfig,
    geometry: &EmissionGeometry,
    omega_s0: f64,
) -> Result<CorrelationArea> {
    pump.validate()?;
    let omega_i0 = pump.omega_p0 - omega_s0;
    if !(omega_i0 > 0.0) {
        return Err(Error::InvalidParameter(
            "signal frequency must lie below the pump frequency".into(),
        ));
    }
    let theta_i0 = geometry.idler_angle(omega_s0, omega_i0)?;
    let a = pump.beam_diameter_um;
    let t0 = transmittance_at(stack, omega_i0, theta_i0)?;
    if !(t0 > 0.0) {
        return Err(Error::Numerical(
            "no transmission at the central idler direction".into(),
        ));
    }
    let theta_abs = theta_i0.abs();
    let lobe = (
        -lobe_edge(stack, omega_i0, theta_abs, t0, -1.0)?,
        lobe_edge(stack, omega_i0, theta_abs, t0, 1.0)?,
    );
    let model = WeightModel {
        stack,
        omega_i0,
        theta_i0,
        pump_coeff: if a.is_finite() { a * a / 8.0 } else { 0.0 },
        lobe,
    };

    let ru = axis_range(&model, true)?;
    let rv = axis_range(&model, false)?;

    let n = 161;
    let us: Vec<f64> = (0..n)
        .map(|k| -ru + 2.0 * ru * k as f64 / (n - 1) as f64)
        .collect();
    let vs: Vec<f64> = (0..n)
        .map(|k| -rv + 2.0 * rv * k as f64 / (n - 1) as f64)
        .collect();
    let mut marginal_u = vec![0.0; n];
    let mut marginal_v = vec![0.0; n];
    for (iu, &u) in us.iter().enumerate() {
        for (iv, &v) in vs.iter().enumerate() {
            let w = model.weight(u, v)?;
            marginal_u[iu] += w;
            marginal_v[iv] += w;
        }
    }
    Ok(CorrelationArea {
        sigma_radial_rad: rms(&us, &marginal_u),
        sigma_azimuthal_rad: rms(&vs, &marginal_v),
    })
}
