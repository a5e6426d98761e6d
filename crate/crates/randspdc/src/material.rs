//! Materials and dispersion.

use crate::{lambda_um_from_omega, Error, Result};
use serde::{Deserialize, Serialize};

/// Refractive-index model of a material, with the vacuum wavelength in
/// micrometers as the argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Dispersion {
    /// Frequency-independent index.
    Constant(f64),
    /// Sellmeier-type form n^2 = b0 + b1 / (lambda^2 - c1) + b2 * lambda^2,
    /// lambda in micrometers.
    Sellmeier { b0: f64, b1: f64, c1: f64, b2: f64 },
}

/// A dielectric with a symbolic id, a dispersion model, an effective scalar
/// nonlinear coefficient chi2 (pm/V, zero for linear materials), and the
/// wavelength band over which the dispersion model is trusted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub id: String,
    pub dispersion: Dispersion,
    /// Effective scalar nonlinear coefficient, pm/V.
    pub chi2: f64,
    pub lambda_min_um: f64,
    pub lambda_max_um: f64,
}

impl Material {
    /// Ordinary-wave LiNbO3 (Sellmeier form), chi2 = d33 = 27 pm/V.
    pub fn lithium_niobate() -> Material {
        Material {
            id: "LiNbO3".to_string(),
            dispersion: Dispersion::Sellmeier {
                b0: 4.9048,
                b1: 0.11768,
                c1: 0.0475,
                b2: -0.027169,
            },
            chi2: 27.0,
            lambda_min_um: 0.35,
            lambda_max_um: 2.5,
        }
    }

    /// SiO2 filler, constant index 1.45, linear.
    pub fn silica() -> Material {
        Material {
            id: "SiO2".to_string(),
            dispersion: Dispersion::Constant(1.45),
            chi2: 0.0,
            lambda_min_um: 0.35,
            lambda_max_um: 2.5,
        }
    }

    /// Constant-index test material.
    pub fn constant(id: &str, n: f64, chi2: f64) -> Material {
        Material {
            id: id.to_string(),
            dispersion: Dispersion::Constant(n),
            chi2,
            lambda_min_um: 0.0,
            lambda_max_um: f64::INFINITY,
        }
    }

    /// Refractive index at angular frequency `omega` (rad/fs).
    ///
    /// Errors if `omega` falls outside the material's supported band or if
    /// the model would return an index below 1.
    pub fn refractive_index(&self, omega: f64) -> Result<f64> {
        let lambda = lambda_um_from_omega(omega);
        if !(lambda >= self.lambda_min_um && lambda <= self.lambda_max_um) {
            return Err(Error::OutOfBand {
                material: self.id.clone(),
                omega_rad_per_fs: omega,
                lambda_min_um: self.lambda_min_um,
                lambda_max_um: self.lambda_max_um,
            });
        }
        let n2 = match self.dispersion {
            Dispersion::Constant(n) => n * n,
            Dispersion::Sellmeier { b0, b1, c1, b2 } => {
                b0 + b1 / (lambda * lambda - c1) + b2 * lambda * lambda
            }
        };
        if !(n2 >= 1.0) {
            return Err(Error::Numerical(format!(
                "index of {} below 1 at omega = {omega} rad/fs",
                self.id
            )));
        }
        Ok(n2.sqrt())
    }

    pub fn is_nonlinear(&self) -> bool {
        self.chi2 != 0.0
    }
}

/// Resolve a material id used in serialized stacks to a builtin material.
pub fn builtin(id: &str) -> Result<Material> {
    match id {
        "LiNbO3" => Ok(Material::lithium_niobate()),
        "SiO2" => Ok(Material::silica()),
        other => Err(Error::UnknownMaterial(other.to_string())),
    }
}
