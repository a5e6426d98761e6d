//! Localization length of the random stacks versus incidence angle.
//!
//! Light at the design wavelength is exponentially attenuated by the
//! random layering; the optical localization length is estimated from an
//! ensemble as xi = -2 <L_opt> / <ln T>, with a bootstrap standard error.
//! Oblique incidence localizes much more strongly because the quarter-wave
//! resonance condition detunes.
//!
//! ```bash
//! cargo run --release --example localization_lengths
//! ```

use randspdc::localization::localization_length;
use randspdc::omega_from_lambda_um;
use randspdc::stack::{generate_random_stack, GeneratorParams};
use rayon::prelude::*;

fn main() -> randspdc::Result<()> {
    let omega0 = omega_from_lambda_um(1.0);
    let count = 600;
    let stacks: Vec<_> = (0..count)
        .into_par_iter()
        .map(|seed| generate_random_stack(&GeneratorParams::new(250, seed)))
        .collect::<randspdc::Result<_>>()?;

    println!(
        "{count} structures of 250 quarter-wave slots, probed at the design frequency\n"
    );
    println!("{:>12} {:>14} {:>12}", "angle (deg)", "xi (um)", "stderr (um)");
    for theta_deg in [0.0f64, 30.0, 60.0] {
        let est = localization_length(&stacks, omega0, theta_deg.to_radians())?;
        println!(
            "{:>12} {:>14.2} {:>12.2}",
            theta_deg, est.xi_um, est.stderr_um
        );
    }
    println!("\nlocalization sharpens with angle: transmission peaks narrow accordingly");
    Ok(())
}
