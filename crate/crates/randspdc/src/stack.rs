//! Random layered structures.

use crate::material::{builtin, Material};
use crate::{omega_from_lambda_um, Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

/// One physical layer: a material and a physical thickness in micrometers.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub material: Material,
    pub thickness_um: f64,
}

/// Generator provenance carried by a stack so that it can be rebuilt from
/// its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub params: GeneratorParams,
    /// Number of Gaussian boundary shifts that had to be redrawn because
    /// they would have produced a non-positive thickness.
    pub resamples: u64,
}

/// An ordered stack of dielectric layers between semi-infinite vacuum
/// ambients (n = 1 on both sides).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub provenance: Option<Provenance>,
}

/// Parameters of the random-structure generator.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    /// Design wavelength in micrometers.
    pub lambda0_um: f64,
    /// Number of quarter-wave elementary layers.
    pub n_elem: usize,
    /// Standard deviation of the boundary shift in optical length, um.
    /// The default corresponds to a Gaussian of full width at half maximum
    /// lambda0 / 40.
    pub jitter_sigma_um: f64,
    pub seed: u64,
}

/// FWHM / sigma for a Gaussian, 2 sqrt(2 ln 2).
const GAUSSIAN_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

impl GeneratorParams {
    pub fn new(n_elem: usize, seed: u64) -> GeneratorParams {
        GeneratorParams {
            lambda0_um: 1.0,
            n_elem,
            jitter_sigma_um: 1.0 / 40.0 / GAUSSIAN_FWHM_PER_SIGMA,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_elem < 1 {
            return Err(Error::InvalidParameter("n_elem must be >= 1".into()));
        }
        if !(self.lambda0_um > 0.0) {
            return Err(Error::InvalidParameter("lambda0_um must be > 0".into()));
        }
        if !(self.jitter_sigma_um >= 0.0) {
            return Err(Error::InvalidParameter("jitter_sigma_um must be >= 0".into()));
        }
        if self.jitter_sigma_um >= self.lambda0_um / 8.0 {
            return Err(Error::InvalidParameter(
                "jitter_sigma_um must be below lambda0/8".into(),
            ));
        }
        Ok(())
    }
}

impl LayerStack {
    pub fn from_layers(layers: Vec<Layer>) -> LayerStack {
        LayerStack {
            layers,
            provenance: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Total physical thickness, um.
    pub fn physical_length_um(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness_um).sum()
    }

    /// Optical length Sum n(omega) d, um.
    pub fn optical_length_um(&self, omega: f64) -> Result<f64> {
        let mut total = 0.0;
        for layer in &self.layers {
            let n = layer.material.refractive_index(omega)?;
            total += layer.thickness_um * n;
        }
        Ok(total)
    }

    /// Optical length projected on the stack normal for propagation at
    /// external angle `theta_ext`: cos(theta) * Sum n(omega) d, um.
    pub fn projected_optical_length_um(&self, omega: f64, theta_ext: f64) -> Result<f64> {
        Ok(self.optical_length_um(omega)? * theta_ext.cos())
    }

    /// Total thickness of nonlinear material, um.
    pub fn nonlinear_length_um(&self) -> f64 {
        self.layers
            .iter()
            .filter(|l| l.material.is_nonlinear())
            .map(|l| l.thickness_um)
            .sum()
    }

    /// Number of internal material boundaries.
    pub fn boundary_count(&self) -> usize {
        self.layers.len().saturating_sub(1)
    }

    /// Reversed layer order (right incidence seen as left incidence).
    pub fn reversed(&self) -> LayerStack {
        LayerStack {
            layers: self.layers.iter().rev().cloned().collect(),
            provenance: self.provenance.clone(),
        }
    }
}

/// Generate a random stack: `n_elem` quarter-wave elementary slots are
/// assigned LiNbO3 or SiO2 with probability 1/2 each, runs of equal
/// material are merged into single physical layers, and each surviving
/// material boundary is displaced by a Gaussian shift of its optical
/// position (standard deviation `jitter_sigma_um`, converted to physical
/// length with the mean of the two adjacent indices at lambda0).
///
/// Shifts that would make a thickness non-positive are redrawn; the number
/// of redraws is recorded in the provenance. Deterministic for a fixed
/// seed.
pub fn generate_random_stack(params: &GeneratorParams) -> Result<LayerStack> {
    params.validate()?;
    let omega0 = omega_from_lambda_um(params.lambda0_um);
    let lnb = Material::lithium_niobate();
    let sio2 = Material::silica();
    let n_lnb = lnb.refractive_index(omega0)?;
    let n_sio2 = sio2.refractive_index(omega0)?;

    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);

    // Elementary slots, then merge runs of equal material.
    let mut layers: Vec<Layer> = Vec::new();
    for _ in 0..params.n_elem {
        let (mat, n) = if rng.gen::<bool>() {
            (&lnb, n_lnb)
        } else {
            (&sio2, n_sio2)
        };
        let d = params.lambda0_um / (4.0 * n);
        match layers.last_mut() {
            Some(last) if last.material.id == mat.id => last.thickness_um += d,
            _ => layers.push(Layer {
                material: mat.clone(),
                thickness_um: d,
            }),
        }
    }

    // Gaussian displacement of every true material boundary.
    let mut resamples: u64 = 0;
    if params.jitter_sigma_um > 0.0 && layers.len() > 1 {
        let normal = Normal::new(0.0, params.jitter_sigma_um)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for b in 0..layers.len() - 1 {
            let n_left = if layers[b].material.id == lnb.id { n_lnb } else { n_sio2 };
            let n_right = if layers[b + 1].material.id == lnb.id { n_lnb } else { n_sio2 };
            let n_local = 0.5 * (n_left + n_right);
            loop {
                let shift_opt = normal.sample(&mut rng);
                let shift_phys = shift_opt / n_local;
                let d_left = layers[b].thickness_um + shift_phys;
                let d_right = layers[b + 1].thickness_um - shift_phys;
                if d_left > 0.0 && d_right > 0.0 {
                    layers[b].thickness_um = d_left;
                    layers[b + 1].thickness_um = d_right;
                    break;
                }
                resamples += 1;
                if resamples > 10_000 {
                    return Err(Error::InvalidParameter(
                        "jitter_sigma_um too large: boundary shifts keep producing \
                         non-positive thicknesses"
                            .into(),
                    ));
                }
            }
        }
    }

    Ok(LayerStack {
        layers,
        provenance: Some(Provenance {
            params: params.clone(),
            resamples,
        }),
    })
}

/// Format a float with 12 significant digits in uppercase scientific
/// notation, the fixed formatting used in all serialized outputs.
pub fn fmt_g12(x: f64) -> String {
    format!("{:.11E}", x)
}

impl LayerStack {
    /// Serialize to the stack JSON schema:
    /// `{lambda0_um, seed, layers: [{material, thickness_um}]}` with
    /// thicknesses printed with 12 significant digits. Generator
    /// provenance, when present, is carried in a `provenance` object.
    pub fn to_json(&self) -> String {
        let (lambda0, seed, prov) = match &self.provenance {
            Some(p) => (
                p.params.lambda0_um,
                p.params.seed,
                format!(
                    ",\"provenance\":{{\"n_elem\":{},\"jitter_sigma_um\":{},\"resamples\":{}}}",
                    p.params.n_elem,
                    fmt_g12(p.params.jitter_sigma_um),
                    p.resamples
                ),
            ),
            None => (1.0, 0, String::new()),
        };
        let layers: Vec<String> = self
            .layers
            .iter()
            .map(|l| {
                format!(
                    "{{\"material\":\"{}\",\"thickness_um\":{}}}",
                    l.material.id,
                    fmt_g12(l.thickness_um)
                )
            })
            .collect();
        format!(
            "{{\"lambda0_um\":{},\"seed\":{},\"layers\":[{}]{}}}",
            fmt_g12(lambda0),
            seed,
            layers.join(","),
            prov
        )
    }

    pub fn from_json(text: &str) -> Result<LayerStack> {
        #[derive(serde::Deserialize)]
        struct LayerDoc {
            material: String,
            thickness_um: f64,
        }
        #[derive(serde::Deserialize)]
        struct ProvDoc {
            n_elem: usize,
            jitter_sigma_um: f64,
            resamples: u64,
        }
        #[derive(serde::Deserialize)]
        struct StackDoc {
            lambda0_um: f64,
            seed: u64,
            layers: Vec<LayerDoc>,
            provenance: Option<ProvDoc>,
        }
        let doc: StackDoc = serde_json::from_str(text).map_err(|e| Error::Json {
            path: "<stack json>".into(),
            source: e,
        })?;
        let mut layers = Vec::with_capacity(doc.layers.len());
        for l in doc.layers {
            if !(l.thickness_um > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "layer thickness {} must be > 0",
                    l.thickness_um
                )));
            }
            layers.push(Layer {
                material: builtin(&l.material)?,
                thickness_um: l.thickness_um,
            });
        }
        let provenance = doc.provenance.map(|p| Provenance {
            params: GeneratorParams {
                lambda0_um: doc.lambda0_um,
                n_elem: p.n_elem,
                jitter_sigma_um: p.jitter_sigma_um,
                seed: doc.seed,
            },
            resamples: p.resamples,
        });
        Ok(LayerStack { layers, provenance })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_fixed_seed() {
        let params = GeneratorParams::new(250, 42);
        let a = generate_random_stack(&params).unwrap();
        let b = generate_random_stack(&params).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn zero_jitter_optical_length_is_exact() {
        let mut params = GeneratorParams::new(250, 7);
        params.jitter_sigma_um = 0.0;
        let stack = generate_random_stack(&params).unwrap();
        let omega0 = omega_from_lambda_um(1.0);
        let l_opt = stack.optical_length_um(omega0).unwrap();
        assert!((l_opt - 62.5).abs() < 1e-9, "l_opt = {l_opt}");
    }

    #[test]
    fn adjacent_layers_have_different_materials() {
        let stack = generate_random_stack(&GeneratorParams::new(400, 3)).unwrap();
        for w in stack.layers.windows(2) {
            assert_ne!(w[0].material.id, w[1].material.id);
        }
        for l in &stack.layers {
            assert!(l.thickness_um > 0.0);
        }
    }

    #[test]
    fn mean_boundary_count_matches_bernoulli_runs() {
        // Boundaries between n_elem slots form Binomial(n_elem - 1, 1/2):
        // mean (n_elem - 1)/2, per-structure variance (n_elem - 1)/4.
        let n_elem = 250usize;
        let trials = 10_000usize;
        let mut total = 0usize;
        for seed in 0..trials as u64 {
            let mut params = GeneratorParams::new(n_elem, seed);
            params.jitter_sigma_um = 0.0;
            let stack = generate_random_stack(&params).unwrap();
            total += stack.boundary_count();
        }
        let mean = total as f64 / trials as f64;
        let expect = (n_elem as f64 - 1.0) / 2.0;
        let sigma_of_mean = ((n_elem as f64 - 1.0) / 4.0 / trials as f64).sqrt();
        assert!(
            (mean - expect).abs() <= 3.0 * sigma_of_mean,
            "mean = {mean}, expect = {expect} +- {}",
            3.0 * sigma_of_mean
        );
    }

    #[test]
    fn json_round_trip() {
        let stack = generate_random_stack(&GeneratorParams::new(50, 9)).unwrap();
        let text = stack.to_json();
        let back = LayerStack::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert_eq!(back.layers.len(), stack.layers.len());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate_random_stack(&GeneratorParams::new(0, 1)).is_err());
        let mut p = GeneratorParams::new(10, 1);
        p.jitter_sigma_um = 0.2;
        assert!(generate_random_stack(&p).is_err());
    }
}
