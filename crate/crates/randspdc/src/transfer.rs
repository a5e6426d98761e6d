//! Oblique-incidence TE transfer-matrix solution for layered stacks.

use crate::stack::LayerStack;
use crate::{Error, Result, C_UM_PER_FS};
use num_complex::Complex64;

/// 2x2 complex matrix acting on (forward, backward) amplitude pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2 {
    pub m: [[Complex64; 2]; 2],
}

impl Matrix2 {
    pub fn identity() -> Matrix2 {
        Matrix2 {
            m: [
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ],
        }
    }

    /// TE interface matrix taking amplitudes from the side with
    /// z-wavevector `k1` to the side with `k2` (continuity of E and dE/dz).
    pub fn interface(k1: f64, k2: f64) -> Matrix2 {
        let s = 0.5 / k2;
        let p = Complex64::new(s * (k2 + k1), 0.0);
        let q = Complex64::new(s * (k2 - k1), 0.0);
        Matrix2 { m: [[p, q], [q, p]] }
    }

    /// Propagation across a layer of thickness `d` with z-wavevector `k`.
    pub fn propagation(k: f64, d: f64) -> Matrix2 {
        let phase = Complex64::new(0.0, k * d).exp();
        Matrix2 {
            m: [
                [phase, Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), phase.conj()],
            ],
        }
    }

    pub fn mul(&self, rhs: &Matrix2) -> Matrix2 {
        let a = &self.m;
        let b = &rhs.m;
        Matrix2 {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
        }
    }

    pub fn apply(&self, v: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (
            self.m[0][0] * v.0 + self.m[0][1] * v.1,
            self.m[1][0] * v.0 + self.m[1][1] * v.1,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Incidence {
    Left,
    Right,
}

/// Forward/backward amplitudes inside one layer, referenced at the layer's
/// left boundary: E(z) = a_plus exp(i kz z) + a_minus exp(-i kz z) with z
/// measured from that boundary.
#[derive(Debug, Clone, Copy)]
pub struct LayerField {
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    /// z-component of the wavevector inside the layer, rad/um.
    pub kz: f64,
    pub thickness_um: f64,
}

impl LayerField {
    /// Field at depth `z` (um) from the layer's left boundary.
    pub fn field_at(&self, z: f64) -> Complex64 {
        let ph = Complex64::new(0.0, self.kz * z).exp();
        self.a_plus * ph + self.a_minus * ph.conj()
    }

    /// dE/dz at depth `z`.
    pub fn derivative_at(&self, z: f64) -> Complex64 {
        let ph = Complex64::new(0.0, self.kz * z).exp();
        Complex64::new(0.0, self.kz) * (self.a_plus * ph - self.a_minus * ph.conj())
    }
}

/// Plane-wave field solution of a stack at one (frequency, external angle),
/// referenced to unit incident amplitude. Layers are always listed in the
/// stack's own order regardless of the incidence side.
#[derive(Debug, Clone)]
pub struct FieldMap {
    pub omega: f64,
    pub theta_ext: f64,
    pub incidence: Incidence,
    pub layers: Vec<LayerField>,
    /// Complex amplitude transmission of the whole stack.
    pub t: Complex64,
    /// Complex amplitude reflection of the whole stack.
    pub r: Complex64,
    /// Ambient z-wavevector, rad/um.
    pub kz_ambient: f64,
}

impl FieldMap {
    pub fn transmittance(&self) -> f64 {
        self.t.norm_sqr()
    }

    pub fn reflectance(&self) -> f64 {
        self.r.norm_sqr()
    }
}

fn ambient_kz(omega: f64, theta_ext: f64) -> Result<f64> {
    if !theta_ext.is_finite() || theta_ext.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::EvanescentInput {
            theta_rad: theta_ext,
        });
    }
    Ok(omega / C_UM_PER_FS * theta_ext.cos())
}

fn layer_kz(n: f64, omega: f64, theta_ext: f64) -> f64 {
    let s = theta_ext.sin();
    omega / C_UM_PER_FS * (n * n - s * s).sqrt()
}

/// Total transfer matrix of the stack: maps (forward, backward) amplitudes
/// in the left ambient at the first interface to the right ambient at the
/// last interface. Composition of stacks multiplies in reverse order.
pub fn transfer_matrix(stack: &LayerStack, omega: f64, theta_ext: f64) -> Result<Matrix2> {
    let k_amb = ambient_kz(omega, theta_ext)?;
    let mut m = Matrix2::identity();
    let mut k_prev = k_amb;
    for layer in &stack.layers {
        let n = layer.material.refractive_index(omega)?;
        let k = layer_kz(n, omega, theta_ext);
        m = Matrix2::interface(k_prev, k).mul(&m);
        m = Matrix2::propagation(k, layer.thickness_um).mul(&m);
        k_prev = k;
    }
    m = Matrix2::interface(k_prev, k_amb).mul(&m);
    Ok(m)
}

/// Solve the internal fields of a stack at one (frequency, angle) for unit
/// incident amplitude from the given side.
pub fn solve_fields(
    stack: &LayerStack,
    omega: f64,
    theta_ext: f64,
    incidence: Incidence,
) -> Result<FieldMap> {
    match incidence {
        Incidence::Left => solve_left(stack, omega, theta_ext),
        Incidence::Right => {
            let mut map = solve_left(&stack.reversed(), omega, theta_ext)?;
            // Re-express the reversed solution in the original frame: layer
            // order flips back and forward/backward amplitudes swap with a
            // propagation phase to the opposite reference edge.
            map.layers.reverse();
            for lf in &mut map.layers {
                let ph = Complex64::new(0.0, lf.kz * lf.thickness_um).exp();
                let a_plus = lf.a_minus * ph.conj();
                let a_minus = lf.a_plus * ph;
                lf.a_plus = a_plus;
                lf.a_minus = a_minus;
            }
            map.incidence = Incidence::Right;
            Ok(map)
        }
    }
}

fn solve_left(stack: &LayerStack, omega: f64, theta_ext: f64) -> Result<FieldMap> {
    let k_amb = ambient_kz(omega, theta_ext)?;
    let m = transfer_matrix(stack, omega, theta_ext)?;
    if m.m[1][1].norm() == 0.0 {
        return Err(Error::Numerical("singular transfer matrix".into()));
    }
    let r = -m.m[1][0] / m.m[1][1];
    // det(M) = 1 for equal vacuum ambients (interface determinants
    // telescope), so t = det/m11 = 1/m11. Evaluating t this way avoids the
    // catastrophic cancellation of m00 + m01*r when |t| is tiny.
    let t = m.m[1][1].inv();

    let mut layers = Vec::with_capacity(stack.layers.len());
    let mut v = (Complex64::new(1.0, 0.0), r);
    let mut k_prev = k_amb;
    for layer in &stack.layers {
        let n = layer.material.refractive_index(omega)?;
        let k = layer_kz(n, omega, theta_ext);
        v = Matrix2::interface(k_prev, k).apply(v);
        layers.push(LayerField {
            a_plus: v.0,
            a_minus: v.1,
            kz: k,
            thickness_um: layer.thickness_um,
        });
        v = Matrix2::propagation(k, layer.thickness_um).apply(v);
        k_prev = k;
    }

    Ok(FieldMap {
        omega,
        theta_ext,
        incidence: Incidence::Left,
        layers,
        t,
        r,
        kz_ambient: k_amb,
    })
}

/// Complex transmission and reflection of a stack on a frequency grid.
#[derive(Debug, Clone)]
pub struct TransmissionSpectrum {
    pub omega: Vec<f64>,
    pub t: Vec<Complex64>,
    pub r: Vec<Complex64>,
    pub theta_ext: f64,
}

impl TransmissionSpectrum {
    pub fn transmittance(&self) -> Vec<f64> {
        self.t.iter().map(|t| t.norm_sqr()).collect()
    }
}

/// Batched [`solve_fields`] over a frequency grid at fixed angle.
pub fn transmission_spectrum(
    stack: &LayerStack,
    omega_grid: &[f64],
    theta_ext: f64,
) -> Result<TransmissionSpectrum> {
    if omega_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "omega grid must be strictly increasing".into(),
        ));
    }
    let mut t = Vec::with_capacity(omega_grid.len());
    let mut r = Vec::with_capacity(omega_grid.len());
    for &omega in omega_grid {
        let map = solve_fields(stack, omega, theta_ext, Incidence::Left)?;
        t.push(map.t);
        r.push(map.r);
    }
    Ok(TransmissionSpectrum {
        omega: omega_grid.to_vec(),
        t,
        r,
        theta_ext,
    })
}

/// Intensity transmittance at a single (frequency, angle), a cheap path
/// used by ensemble scans.
pub fn transmittance_at(stack: &LayerStack, omega: f64, theta_ext: f64) -> Result<f64> {
    let m = transfer_matrix(stack, omega, theta_ext)?;
    Ok(m.m[1][1].norm_sqr().recip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::Material;
    use crate::stack::{generate_random_stack, GeneratorParams, Layer, LayerStack};
    use crate::omega_from_lambda_um;

    fn qw_stack(n_hi: f64, n_lo: f64, pairs: usize, lambda0: f64) -> LayerStack {
        let hi = Material::constant("hi", n_hi, 0.0);
        let lo = Material::constant("lo", n_lo, 0.0);
        let mut layers = Vec::new();
        for _ in 0..pairs {
            layers.push(Layer {
                material: hi.clone(),
                thickness_um: lambda0 / (4.0 * n_hi),
            });
            layers.push(Layer {
                material: lo.clone(),
                thickness_um: lambda0 / (4.0 * n_lo),
            });
        }
        LayerStack::from_layers(layers)
    }

    #[test]
    fn empty_stack_is_transparent() {
        let stack = LayerStack::from_layers(vec![]);
        let omega = omega_from_lambda_um(1.0);
        let map = solve_fields(&stack, omega, 0.0, Incidence::Left).unwrap();
        assert!((map.t - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(map.r.norm() < 1e-14);
        assert!(map.layers.is_empty());
    }

    #[test]
    fn half_wave_layer_is_transparent() {
        let lambda = 1.3;
        let omega = omega_from_lambda_um(lambda);
        let n = 1.45;
        let stack = LayerStack::from_layers(vec![Layer {
            material: Material::constant("sio2", n, 0.0),
            thickness_um: lambda / (2.0 * n),
        }]);
        let map = solve_fields(&stack, omega, 0.0, Incidence::Left).unwrap();
        assert!((map.transmittance() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quarter_wave_stack_matches_closed_form() {
        // Independent oracle: T = 4 q / (1 + q)^2, q = (n_hi/n_lo)^(2N).
        let (n_hi, n_lo, pairs) = (2.2325f64, 1.45f64, 30usize);
        let q = (n_hi / n_lo).powi(2 * pairs as i32);
        let expect = 4.0 * q / (1.0 + q) / (1.0 + q);
        let stack = qw_stack(n_hi, n_lo, pairs, 1.0);
        let omega = omega_from_lambda_um(1.0);
        let t = transmittance_at(&stack, omega, 0.0).unwrap();
        assert!(
            ((t - expect) / expect).abs() < 1e-6,
            "t = {t:e}, expect = {expect:e}"
        );
    }

    #[test]
    fn flux_conservation_and_reciprocity() {
        let stack = generate_random_stack(&GeneratorParams::new(250, 11)).unwrap();
        let omega0 = omega_from_lambda_um(1.0);
        for (i, theta) in [0.0, 0.3, 1.0].iter().enumerate() {
            let omega = omega0 * (1.0 + 0.003 * i as f64);
            let left = solve_fields(&stack, omega, *theta, Incidence::Left).unwrap();
            assert!(
                (left.transmittance() + left.reflectance() - 1.0).abs() < 1e-10,
                "flux violation at theta {theta}"
            );
            let right = solve_fields(&stack, omega, *theta, Incidence::Right).unwrap();
            assert!((left.transmittance() - right.transmittance()).abs() < 1e-10);
        }
    }

    #[test]
    fn field_continuity_at_boundaries() {
        let stack = generate_random_stack(&GeneratorParams::new(100, 5)).unwrap();
        let omega = omega_from_lambda_um(1.02);
        for incidence in [Incidence::Left, Incidence::Right] {
            let map = solve_fields(&stack, omega, 0.35, incidence).unwrap();
            for w in map.layers.windows(2) {
                let e_left = w[0].field_at(w[0].thickness_um);
                let e_right = w[1].field_at(0.0);
                assert!(
                    (e_left - e_right).norm() <= 1e-10 * e_left.norm().max(1.0),
                    "E discontinuity"
                );
                let d_left = w[0].derivative_at(w[0].thickness_um);
                let d_right = w[1].derivative_at(0.0);
                assert!((d_left - d_right).norm() <= 1e-10 * d_left.norm().max(1.0));
            }
        }
    }

    #[test]
    fn right_incidence_fields_solve_the_same_stack() {
        // The right-incidence map must satisfy the ambient boundary
        // conditions of a wave coming from the right: outgoing-only on the
        // left with amplitude t.
        let stack = generate_random_stack(&GeneratorParams::new(60, 8)).unwrap();
        let omega = omega_from_lambda_um(0.98);
        let map = solve_fields(&stack, omega, 0.0, Incidence::Right).unwrap();
        // Continuity with the left ambient: E = t exp(-i k z) just inside
        // the left ambient means E(first boundary) = t and E' = -i k t.
        let first = &map.layers[0];
        let e0 = first.field_at(0.0);
        assert!((e0 - map.t).norm() < 1e-10 * map.t.norm().max(1.0));
        let d0 = first.derivative_at(0.0);
        let expect = -Complex64::new(0.0, map.kz_ambient) * map.t;
        assert!((d0 - expect).norm() < 1e-10 * expect.norm().max(1.0));
    }

    #[test]
    fn composition_of_transfer_matrices() {
        let a = generate_random_stack(&GeneratorParams::new(40, 1)).unwrap();
        let b = generate_random_stack(&GeneratorParams::new(40, 2)).unwrap();
        let mut joined = a.layers.clone();
        joined.extend(b.layers.clone());
        let joined = LayerStack::from_layers(joined);
        let omega = omega_from_lambda_um(1.0);
        let theta = 0.2;
        let ma = transfer_matrix(&a, omega, theta).unwrap();
        let mb = transfer_matrix(&b, omega, theta).unwrap();
        let mab = transfer_matrix(&joined, omega, theta).unwrap();
        // The ambient gap between a and b collapses because interface
        // matrices to/from the ambient cancel.
        let prod = mb.mul(&ma);
        for i in 0..2 {
            for j in 0..2 {
                let diff = (prod.m[i][j] - mab.m[i][j]).norm();
                let scale = mab.m[i][j].norm().max(1.0);
                assert!(diff <= 1e-12 * scale, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn thickness_scaling_leaves_t_and_r_unchanged() {
        // Scaling all thicknesses by s and probing at omega/s with the
        // dispersion frozen at the original omega keeps k*d products fixed.
        let omega = omega_from_lambda_um(1.0);
        let stack = generate_random_stack(&GeneratorParams::new(80, 4)).unwrap();
        let frozen: Vec<Layer> = stack
            .layers
            .iter()
            .map(|l| Layer {
                material: Material::constant(
                    &l.material.id,
                    l.material.refractive_index(omega).unwrap(),
                    0.0,
                ),
                thickness_um: l.thickness_um,
            })
            .collect();
        let base = LayerStack::from_layers(frozen.clone());
        let s = 1.7;
        let scaled = LayerStack::from_layers(
            frozen
                .iter()
                .map(|l| Layer {
                    material: l.material.clone(),
                    thickness_um: l.thickness_um * s,
                })
                .collect(),
        );
        let m0 = solve_fields(&base, omega, 0.0, Incidence::Left).unwrap();
        let m1 = solve_fields(&scaled, omega / s, 0.0, Incidence::Left).unwrap();
        assert!((m0.t - m1.t).norm() < 1e-12);
        assert!((m0.r - m1.r).norm() < 1e-12);
    }

    #[test]
    fn evanescent_input_rejected() {
        let stack = LayerStack::from_layers(vec![]);
        let omega = omega_from_lambda_um(1.0);
        assert!(solve_fields(&stack, omega, std::f64::consts::FRAC_PI_2, Incidence::Left).is_err());
    }
}
