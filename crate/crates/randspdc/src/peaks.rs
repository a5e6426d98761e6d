//! Transmission-peak detection and FWHM estimation.

use crate::stack::LayerStack;
use crate::transfer::{transmittance_at, TransmissionSpectrum};
use crate::{lambda_um_from_omega, Result, C_UM_PER_FS};

/// A transmission resonance: center frequency, FWHM in frequency and in
/// wavelength, and peak transmittance.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Peak {
    pub omega_c: f64,
    pub fwhm_omega: f64,
    pub fwhm_lambda_nm: f64,
    pub t_max: f64,
}

/// Peaks found in a spectrum plus the number of candidates dropped because
/// a half-maximum crossing was not bracketed by the grid.
#[derive(Debug, Clone, Default)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
    pub dropped: usize,
}

fn fwhm_lambda_nm(omega_lo: f64, omega_hi: f64) -> f64 {
    (lambda_um_from_omega(omega_lo) - lambda_um_from_omega(omega_hi)) * 1e3
}

/// Linear interpolation of the half-maximum crossing between two samples.
fn cross(w0: f64, t0: f64, w1: f64, t1: f64, half: f64) -> f64 {
    w0 + (half - t0) / (t1 - t0) * (w1 - w0)
}

fn peaks_in_samples(omega: &[f64], t: &[f64], floor: f64) -> PeakSet {
    let n = t.len();
    let mut set = PeakSet::default();
    if n < 3 {
        return set;
    }
    for i in 1..n - 1 {
        if !(t[i] > floor && t[i] > t[i - 1] && t[i] >= t[i + 1]) {
            continue;
        }
        let half = t[i] / 2.0;
        // Walk outward to the half-maximum crossings.
        let mut lo = None;
        let mut j = i;
        while j > 0 {
            if t[j - 1] <= half {
                lo = Some(cross(omega[j - 1], t[j - 1], omega[j], t[j], half));
                break;
            }
            j -= 1;
        }
        let mut hi = None;
        let mut j = i;
        while j + 1 < n {
            if t[j + 1] <= half {
                hi = Some(cross(omega[j], t[j], omega[j + 1], t[j + 1], half));
                break;
            }
            j += 1;
        }
        match (lo, hi) {
            (Some(lo), Some(hi)) => set.peaks.push(Peak {
                omega_c: omega[i],
                fwhm_omega: hi - lo,
                fwhm_lambda_nm: fwhm_lambda_nm(lo, hi),
                t_max: t[i],
            }),
            _ => set.dropped += 1,
        }
    }
    set
}

/// Local maxima of `|t|^2` above `floor_fraction` of the global maximum,
/// with FWHM from linear interpolation of the half-maximum crossings.
/// Candidates whose crossings are not bracketed by the grid are dropped
/// and counted.
pub fn find_peaks(spectrum: &TransmissionSpectrum, floor_fraction: f64) -> PeakSet {
    let t = spectrum.transmittance();
    let global_max = t.iter().cloned().fold(0.0f64, f64::max);
    if global_max <= 0.0 {
        return PeakSet::default();
    }
    peaks_in_samples(&spectrum.omega, &t, floor_fraction * global_max)
}

/// Options for the adaptive peak scan of a stack.
#[derive(Debug, Clone)]
pub struct ScanOptions {
    /// Coarse samples per free spectral range of the stack.
    pub oversample_per_fsr: f64,
    /// Local maxima below this fraction of the global scan maximum are
    /// treated as flat surroundings.
    pub floor_fraction: f64,
    /// Refinement stops once the FWHM spans at least this many samples.
    pub min_samples_per_fwhm: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            oversample_per_fsr: 4000.0,
            floor_fraction: 0.01,
            min_samples_per_fwhm: 15,
        }
    }
}

/// Coarse scan of the transmittance over `band` followed by local grid
/// refinement of every candidate peak. Peak widths of random stacks vary
/// by orders of magnitude, so a single uniform grid cannot resolve them
/// all; the refinement zooms each candidate until its FWHM spans at least
/// `min_samples_per_fwhm` samples.
pub fn scan_transmission_peaks(
    stack: &LayerStack,
    band: (f64, f64),
    theta_ext: f64,
    opts: &ScanOptions,
) -> Result<PeakSet> {
    let (omega_lo, omega_hi) = band;
    if !(omega_hi > omega_lo) {
        return Err(crate::Error::InvalidParameter(
            "band must have omega_hi > omega_lo".into(),
        ));
    }
    let omega_mid = 0.5 * (omega_lo + omega_hi);
    // Free spectral range of a stack of optical length L is pi c / L.
    let l_opt = stack
        .projected_optical_length_um(omega_mid, theta_ext)?
        .max(lambda_um_from_omega(omega_mid));
    let fsr = std::f64::consts::PI * C_UM_PER_FS / l_opt;
    let step = fsr / opts.oversample_per_fsr;
    let n = ((omega_hi - omega_lo) / step).ceil() as usize + 1;

    let mut omega = Vec::with_capacity(n);
    let mut t = Vec::with_capacity(n);
    for i in 0..n {
        let w = omega_lo + (omega_hi - omega_lo) * i as f64 / (n - 1) as f64;
        omega.push(w);
        t.push(transmittance_at(stack, w, theta_ext)?);
    }
    let global_max = t.iter().cloned().fold(0.0f64, f64::max);
    if global_max <= 0.0 {
        return Ok(PeakSet::default());
    }
    let floor = opts.floor_fraction * global_max;

    let mut set = PeakSet::default();
    let coarse_step = omega[1] - omega[0];
    for i in 1..n - 1 {
        if !(t[i] > floor && t[i] > t[i - 1] && t[i] >= t[i + 1]) {
            continue;
        }
        match refine_peak(stack, theta_ext, omega[i], coarse_step, band, opts)? {
            Some(peak) => {
                // The same resonance can surface from adjacent coarse
                // candidates once refined; keep the stronger one.
                let dup = set.peaks.iter_mut().find(|p: &&mut Peak| {
                    (p.omega_c - peak.omega_c).abs()
                        < 0.5 * (p.fwhm_omega + peak.fwhm_omega).max(coarse_step)
                });
                match dup {
                    Some(p) => {
                        if peak.t_max > p.t_max {
                            *p = peak;
                        }
                    }
                    None => set.peaks.push(peak),
                }
            }
            None => set.dropped += 1,
        }
    }
    Ok(set)
}

fn refine_peak(
    stack: &LayerStack,
    theta_ext: f64,
    omega_guess: f64,
    coarse_step: f64,
    band: (f64, f64),
    opts: &ScanOptions,
) -> Result<Option<Peak>> {
    const POINTS: usize = 65;
    let mut center = omega_guess;
    let mut window = 4.0 * coarse_step;
    let min_window = 1e-12 * omega_guess;
    for _ in 0..40 {
        let lo = (center - window / 2.0).max(band.0);
        let hi = (center + window / 2.0).min(band.1);
        if !(hi > lo) {
            return Ok(None);
        }
        let step = (hi - lo) / (POINTS - 1) as f64;
        let mut omega = Vec::with_capacity(POINTS);
        let mut t = Vec::with_capacity(POINTS);
        for i in 0..POINTS {
            let w = lo + step * i as f64;
            omega.push(w);
            t.push(transmittance_at(stack, w, theta_ext)?);
        }
        let (imax, &tmax) = t
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        if tmax <= 0.0 {
            return Ok(None);
        }
        // Peak walked out of the window: recenter and retry.
        if imax < 2 || imax > POINTS - 3 {
            let at_band_edge = (omega[imax] - band.0).abs() < step
                || (band.1 - omega[imax]).abs() < step;
            if at_band_edge {
                return Ok(None);
            }
            center = omega[imax];
            continue;
        }
        let local = peaks_in_samples(&omega, &t, 0.0);
        let found = local
            .peaks
            .iter()
            .min_by(|a, b| {
                let da = (a.omega_c - omega[imax]).abs();
                let db = (b.omega_c - omega[imax]).abs();
                da.partial_cmp(&db).unwrap()
            })
            .cloned();
        match found {
            Some(peak) if (peak.omega_c - omega[imax]).abs() <= 2.0 * step => {
                let samples_per_fwhm = peak.fwhm_omega / step;
                if samples_per_fwhm >= opts.min_samples_per_fwhm as f64
                    && window <= 40.0 * peak.fwhm_omega
                {
                    // Parabolic vertex through the top three samples gives a
                    // sub-step center estimate.
                    let (t0, t1, t2) = (t[imax - 1], t[imax], t[imax + 1]);
                    let denom = t0 - 2.0 * t1 + t2;
                    let omega_c = if denom < 0.0 {
                        omega[imax] + 0.5 * step * (t0 - t2) / denom
                    } else {
                        omega[imax]
                    };
                    return Ok(Some(Peak {
                        omega_c,
                        t_max: tmax,
                        ..peak
                    }));
                }
                center = peak.omega_c;
                window = (8.0 * peak.fwhm_omega).max(min_window);
            }
            _ => {
                // Half-maximum not bracketed inside the window: zoom out
                // unless the window already spans the whole band.
                if lo <= band.0 && hi >= band.1 {
                    return Ok(None);
                }
                center = omega[imax];
                window *= 4.0;
            }
        }
        if window < min_window {
            return Ok(None);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::TransmissionSpectrum;
    use num_complex::Complex64;

    fn spectrum_from_t(omega: Vec<f64>, t_int: Vec<f64>) -> TransmissionSpectrum {
        let t: Vec<Complex64> = t_int
            .iter()
            .map(|&ti| Complex64::new(ti.sqrt(), 0.0))
            .collect();
        let r = t
            .iter()
            .map(|ti| Complex64::new((1.0 - ti.norm_sqr()).max(0.0).sqrt(), 0.0))
            .collect();
        TransmissionSpectrum {
            omega,
            t,
            r,
            theta_ext: 0.0,
        }
    }

    fn lorentzian(omega: f64, center: f64, gamma: f64, amp: f64) -> f64 {
        amp / (1.0 + ((omega - center) / gamma).powi(2))
    }

    #[test]
    fn lorentzian_fwhm_recovered() {
        let center = 1.9;
        let gamma = 0.004;
        let n = 4001;
        let omega: Vec<f64> = (0..n).map(|i| 1.8 + 0.2 * i as f64 / (n - 1) as f64).collect();
        let step = omega[1] - omega[0];
        let t: Vec<f64> = omega.iter().map(|&w| lorentzian(w, center, gamma, 1.0)).collect();
        let set = find_peaks(&spectrum_from_t(omega, t), 0.01);
        assert_eq!(set.peaks.len(), 1);
        let p = &set.peaks[0];
        assert!((p.omega_c - center).abs() <= step);
        assert!((p.fwhm_omega - 2.0 * gamma).abs() <= step, "fwhm = {}", p.fwhm_omega);
    }

    #[test]
    fn flat_spectrum_has_no_peaks() {
        let omega: Vec<f64> = (0..100).map(|i| 1.0 + 0.001 * i as f64).collect();
        let t = vec![0.5; 100];
        let set = find_peaks(&spectrum_from_t(omega, t), 0.01);
        assert!(set.peaks.is_empty());
    }

    #[test]
    fn two_separated_lorentzians() {
        let n = 8001;
        let omega: Vec<f64> = (0..n).map(|i| 1.5 + 0.5 * i as f64 / (n - 1) as f64).collect();
        let step = omega[1] - omega[0];
        let (c1, g1) = (1.65, 0.003);
        let (c2, g2) = (1.85, 0.006);
        let t: Vec<f64> = omega
            .iter()
            .map(|&w| lorentzian(w, c1, g1, 1.0) + lorentzian(w, c2, g2, 0.5))
            .collect();
        let set = find_peaks(&spectrum_from_t(omega, t), 0.01);
        assert_eq!(set.peaks.len(), 2);
        assert!((set.peaks[0].fwhm_omega - 2.0 * g1).abs() <= step);
        assert!((set.peaks[1].fwhm_omega - 2.0 * g2).abs() <= step);
    }

    #[test]
    fn edge_peak_is_dropped_and_counted() {
        // A peak whose right half-crossing sits beyond the grid.
        let n = 1001;
        let omega: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64 / (n - 1) as f64).collect();
        let t: Vec<f64> = omega.iter().map(|&w| lorentzian(w, 1.0995, 0.002, 1.0)).collect();
        let set = find_peaks(&spectrum_from_t(omega, t), 0.01);
        assert!(set.peaks.is_empty());
        assert_eq!(set.dropped, 1);
    }

    #[test]
    fn gaussian_fwhm_recovered() {
        let center = 2.0;
        let sigma = 0.01;
        let expect = 2.0 * (2.0f64.ln() * 2.0).sqrt() * sigma;
        let n = 4001;
        let omega: Vec<f64> = (0..n).map(|i| 1.9 + 0.2 * i as f64 / (n - 1) as f64).collect();
        let step = omega[1] - omega[0];
        let t: Vec<f64> = omega
            .iter()
            .map(|&w| 0.9 * (-(w - center).powi(2) / (2.0 * sigma * sigma)).exp())
            .collect();
        let set = find_peaks(&spectrum_from_t(omega, t), 0.01);
        assert_eq!(set.peaks.len(), 1);
        assert!((set.peaks[0].fwhm_omega - expect).abs() <= step);
    }
}
