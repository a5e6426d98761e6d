//! Localization-length estimation from ensembles of random stacks.

use crate::stack::LayerStack;
use crate::transfer::transmittance_at;
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Localization length estimate with a bootstrap standard error.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LocalizationEstimate {
    /// Optical localization length, um. Infinite when the ensemble is
    /// transparent (mean ln T = 0).
    pub xi_um: f64,
    pub stderr_um: f64,
    /// Structures used.
    pub count: usize,
    /// Structures excluded because T was numerically zero.
    pub excluded: usize,
}

fn xi_of(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len() as f64;
    let mean_l: f64 = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_ln_t: f64 = samples.iter().map(|s| s.1).sum::<f64>() / n;
    // Mean ln T at or above zero (within rounding of ln(1)) means the
    // ensemble is transparent: report the unbounded sentinel.
    if mean_ln_t >= -1e-12 {
        f64::INFINITY
    } else {
        -2.0 * mean_l / mean_ln_t
    }
}

/// Single-length estimator xi = -2 <L_opt> / <ln T> over per-structure
/// samples of (optical length projected on the stack normal, ln T), with a
/// bootstrap standard error over structures.
pub fn estimate_from_samples(samples: &[(f64, f64)], excluded: usize) -> LocalizationEstimate {
    let xi = xi_of(samples);
    let stderr = if xi.is_finite() && samples.len() > 1 {
        let mut rng = ChaCha12Rng::seed_from_u64(0xB005_EED0 ^ samples.len() as u64);
        const B: usize = 200;
        let mut reps = Vec::with_capacity(B);
        let mut resample = vec![(0.0, 0.0); samples.len()];
        for _ in 0..B {
            for slot in resample.iter_mut() {
                *slot = samples[rng.gen_range(0..samples.len())];
            }
            let v = xi_of(&resample);
            if v.is_finite() {
                reps.push(v);
            }
        }
        let mean = reps.iter().sum::<f64>() / reps.len() as f64;
        (reps.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps.len() as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    LocalizationEstimate {
        xi_um: xi,
        stderr_um: stderr,
        count: samples.len(),
        excluded,
    }
}

/// Localization length of an ensemble of stacks at fixed (frequency,
/// external angle). Requires at least 100 structures.
pub fn localization_length(
    stacks: &[LayerStack],
    omega: f64,
    theta_ext: f64,
) -> Result<LocalizationEstimate> {
    if stacks.len() < 100 {
        return Err(Error::InvalidParameter(format!(
            "localization estimate needs >= 100 structures, got {}",
            stacks.len()
        )));
    }
    let mut samples = Vec::with_capacity(stacks.len());
    let mut excluded = 0usize;
    for stack in stacks {
        let t = transmittance_at(stack, omega, theta_ext)?;
        if t <= 0.0 {
            excluded += 1;
            continue;
        }
        let l_opt = stack.projected_optical_length_um(omega, theta_ext)?;
        samples.push((l_opt, t.ln()));
    }
    if samples.is_empty() {
        return Err(Error::Numerical("all structures had T = 0".into()));
    }
    Ok(estimate_from_samples(&samples, excluded))
}
