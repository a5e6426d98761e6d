//! Two-photon amplitude in the time domain.
//!
//! Transforms the joint spectral amplitude of a narrow localized-mode
//! pair to the time domain, verifies the Parseval identity between both
//! domains, and prints the photon-flux widths: a narrow spectral peak
//! means a long emission time.
//!
//! ```bash
//! cargo run --release --example temporal_amplitudes
//! ```

use randspdc::analysis::{photon_flux, temporal_amplitude, weighted_spectral_norm};
use randspdc::ensemble::{search_structures, EnsembleConfig, SearchCriteria, SearchMode};
use randspdc::spdc::{
    two_photon_amplitude, EmissionGeometry, FrequencyGrid, PairPhoton, PumpConfig,
};

fn rms_width(t: &[f64], f: &[f64]) -> f64 {
    let total: f64 = f.iter().sum();
    let mean: f64 = t.iter().zip(f).map(|(t, f)| t * f).sum::<f64>() / total;
    (t.iter()
        .zip(f)
        .map(|(t, f)| f * (t - mean) * (t - mean))
        .sum::<f64>()
        / total)
        .sqrt()
}

fn main() -> randspdc::Result<()> {
    let config = EnsembleConfig::new(29, 1);
    let criteria = SearchCriteria {
        mode: SearchMode::DegeneratePeak,
        min_t_max: 0.9,
        pump_floor: 0.1,
    };
    let found = search_structures(&config, &criteria, 3000, 1)?;
    let m = found.matches.first().expect("a peak within the budget");
    let peak = &m.peaks[0];
    println!(
        "peak at {:.5} rad/fs, FWHM {:.3e} rad/fs -> expected emission time ~{:.0} fs",
        peak.omega_c,
        peak.fwhm_omega,
        2.0 / peak.fwhm_omega
    );

    let grid = FrequencyGrid::degenerate(peak.omega_c, 10.0 * peak.fwhm_omega, 128)?;
    let pump = PumpConfig::new(2.0 * peak.omega_c);
    let tpa = two_photon_amplitude(&m.stack, &pump, &EmissionGeometry::new(0.0), &grid)?;

    let window = 40.0 / peak.fwhm_omega;
    let temporal = temporal_amplitude(&tpa, window, 512)?;
    let spectral_norm = weighted_spectral_norm(&tpa);
    let temporal_norm = temporal.norm_sq();
    println!(
        "Parseval: spectral {spectral_norm:.6e} vs temporal {temporal_norm:.6e} (rel. diff {:.1e})",
        (spectral_norm - temporal_norm).abs() / spectral_norm
    );
    if temporal.aliasing_warning {
        println!("warning: window clips the temporal amplitude");
    }

    let flux_s = photon_flux(&temporal, PairPhoton::Signal);
    let flux_i = photon_flux(&temporal, PairPhoton::Idler);
    println!(
        "signal flux RMS width {:.0} fs, idler {:.0} fs",
        rms_width(&flux_s.t_fs, &flux_s.values),
        rms_width(&flux_i.t_fs, &flux_i.values)
    );
    println!("\nnarrow localized modes emit over times far longer than the 250 fs pump");
    Ok(())
}
