//! Angular correlation area of the idler photon.
//!
//! For a signal photon detected at a fixed angle, the idler emerges
//! within a finite cone set by the angular width of the structure's
//! transmission resonance and by the pump's transverse momentum spread.
//! This example prints the RMS radial and azimuthal spreads versus the
//! pump beam diameter: a tighter pump focus widens the correlation area
//! until the resonance width takes over.
//!
//! ```bash
//! cargo run --release --example correlation_area
//! ```

use randspdc::ensemble::{search_structures, EnsembleConfig, SearchCriteria, SearchMode};
use randspdc::omega_from_lambda_um;
use randspdc::spdc::{correlation_area, EmissionGeometry, PumpConfig};

fn main() -> randspdc::Result<()> {
    let omega0 = omega_from_lambda_um(1.0);
    let mut config = EnsembleConfig::new(1, 1);
    config.band = (0.96 * omega0, 1.04 * omega0);
    let criteria = SearchCriteria {
        mode: SearchMode::DegeneratePeak,
        min_t_max: 0.9,
        pump_floor: 0.0,
    };
    let found = search_structures(&config, &criteria, 2000, 1)?;
    let m = found.matches.first().expect("a peak within the budget");
    let peak = &m.peaks[0];
    println!("peak at {:.5} rad/fs, T = {:.4}\n", peak.omega_c, peak.t_max);

    // Signal detected slightly off axis; idler around the opposite side.
    let geometry = EmissionGeometry::new(2f64.to_radians());
    println!(
        "{:>18} {:>16} {:>16}",
        "pump diam (um)", "radial (mrad)", "azimuthal (mrad)"
    );
    for diameter in [f64::INFINITY, 1000.0, 300.0, 100.0, 30.0] {
        let mut pump = PumpConfig::new(2.0 * peak.omega_c);
        pump.beam_diameter_um = diameter;
        let area = correlation_area(&m.stack, &pump, &geometry, peak.omega_c)?;
        let label = if diameter.is_infinite() {
            "plane wave".to_string()
        } else {
            format!("{diameter:.0}")
        };
        println!(
            "{label:>18} {:>16.3} {:>16.3}",
            1e3 * area.sigma_radial_rad,
            1e3 * area.sigma_azimuthal_rad
        );
    }
    println!("\na plane-wave pump pins the idler direction; focusing opens the cone");
    Ok(())
}
