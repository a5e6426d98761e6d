//! Plot-ready exports: CSV tables, the two-photon-amplitude binary layout
//! and its JSON sidecar, and Schmidt-mode sidecar files. All floats are
//! printed with 12 significant digits in uppercase E notation so repeated
//! runs produce byte-identical files.

use crate::analysis::{FransonPattern, HomPattern, SchmidtResult, TemporalAmplitude};
use crate::peaks::PeakSet;
use crate::spdc::{
    FrequencyGrid, MarginalSpectrum, Normalization, RelativeSpectrum, TwoPhotonAmplitude,
};
use crate::stack::fmt_g12;
use crate::transfer::TransmissionSpectrum;
use crate::{Error, Result};
use num_complex::Complex64;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

fn create(path: &Path) -> Result<BufWriter<std::fs::File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    Ok(BufWriter::new(std::fs::File::create(path).map_err(
        |e| Error::io(path.display().to_string(), e),
    )?))
}

fn finish(mut w: BufWriter<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path.display().to_string(), e))
}

macro_rules! out {
    ($w:expr, $path:expr, $($arg:tt)*) => {
        writeln!($w, $($arg)*).map_err(|e| Error::io($path.display().to_string(), e))?
    };
}

/// CSV `omega_rad_per_fs,T,R,re_t,im_t`.
pub fn write_spectrum_csv(spectrum: &TransmissionSpectrum, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    out!(w, path, "omega_rad_per_fs,T,R,re_t,im_t");
    for k in 0..spectrum.omega.len() {
        out!(
            w,
            path,
            "{},{},{},{},{}",
            fmt_g12(spectrum.omega[k]),
            fmt_g12(spectrum.t[k].norm_sqr()),
            fmt_g12(spectrum.r[k].norm_sqr()),
            fmt_g12(spectrum.t[k].re),
            fmt_g12(spectrum.t[k].im)
        );
    }
    finish(w, path)
}

/// CSV `omega_c_rad_per_fs,fwhm_omega_rad_per_fs,fwhm_lambda_nm,t_max`
/// plus a trailing comment with the dropped-candidate count.
pub fn write_peaks_csv(set: &PeakSet, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    out!(w, path, "omega_c_rad_per_fs,fwhm_omega_rad_per_fs,fwhm_lambda_nm,t_max");
    for p in &set.peaks {
        out!(
            w,
            path,
            "{},{},{},{}",
            fmt_g12(p.omega_c),
            fmt_g12(p.fwhm_omega),
            fmt_g12(p.fwhm_lambda_nm),
            fmt_g12(p.t_max)
        );
    }
    out!(w, path, "# dropped,{}", set.dropped);
    finish(w, path)
}

/// CSV `tau_fs,rate`.
pub fn write_hom_csv(pattern: &HomPattern, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    out!(w, path, "tau_fs,rate");
    for k in 0..pattern.tau_fs.len() {
        out!(
            w,
            path,
            "{},{}",
            fmt_g12(pattern.tau_fs[k]),
            fmt_g12(pattern.rate[k])
        );
    }
    finish(w, path)
}

/// CSV `tau_s_fs,tau_i_fs,rate`, row-major over the delay grid.
pub fn write_franson_csv(pattern: &FransonPattern, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    out!(w, path, "tau_s_fs,tau_i_fs,rate");
    for (j, &ts) in pattern.tau_s_fs.iter().enumerate() {
        for (q, &ti) in pattern.tau_i_fs.iter().enumerate() {
            out!(
                w,
                path,
                "{},{},{}",
                fmt_g12(ts),
                fmt_g12(ti),
                fmt_g12(pattern.rate[j * pattern.tau_i_fs.len() + q])
            );
        }
    }
    finish(w, path)
}

/// CSV `omega_rad_per_fs,spectrum_ev` of a marginal energy spectrum.
pub fn write_marginal_csv(spectrum: &MarginalSpectrum, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    out!(w, path, "omega_rad_per_fs,spectrum_ev");
    for k in 0..spectrum.omega.len() {
        out!(
            w,
            path,
            "{},{}",
            fmt_g12(spectrum.omega[k]),
            fmt_g12(spectrum.values[k])
        );
    }
    finish(w, path)
}

/// CSV `omega_rad_per_fs,ratio` of the relative (enhancement) spectrum.
pub fn write_relative_csv(spectrum: &RelativeSpectrum, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    out!(w, path, "omega_s_rad_per_fs,ratio");
    for k in 0..spectrum.omega_s.len() {
        out!(
            w,
            path,
            "{},{}",
            fmt_g12(spectrum.omega_s[k]),
            fmt_g12(spectrum.ratio[k])
        );
    }
    finish(w, path)
}

/// CSV `omega_s_rad_per_fs,omega_i_rad_per_fs,abs_phi_sq` of the joint
/// spectral intensity, row-major.
pub fn write_jsi_csv(tpa: &TwoPhotonAmplitude, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    out!(w, path, "omega_s_rad_per_fs,omega_i_rad_per_fs,abs_phi_sq");
    for (j, &ws) in tpa.grid.omega_s.iter().enumerate() {
        for (q, &wi) in tpa.grid.omega_i.iter().enumerate() {
            out!(
                w,
                path,
                "{},{},{}",
                fmt_g12(ws),
                fmt_g12(wi),
                fmt_g12(tpa.at(j, q).norm_sqr())
            );
        }
    }
    finish(w, path)
}

/// CSV `t_s_fs,t_i_fs,abs_phi_sq` of the joint temporal intensity.
pub fn write_jti_csv(temporal: &TemporalAmplitude, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    out!(w, path, "t_s_fs,t_i_fs,abs_phi_sq");
    for (m, &ts) in temporal.t_s_fs.iter().enumerate() {
        for (q, &ti) in temporal.t_i_fs.iter().enumerate() {
            out!(
                w,
                path,
                "{},{},{}",
                fmt_g12(ts),
                fmt_g12(ti),
                fmt_g12(temporal.at(m, q).norm_sqr())
            );
        }
    }
    finish(w, path)
}

/// Two-column CSV with caller-provided header, for fluxes and other
/// simple traces.
pub fn write_xy_csv(header: &str, x: &[f64], y: &[f64], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    out!(w, path, "{header}");
    for k in 0..x.len().min(y.len()) {
        out!(w, path, "{},{}", fmt_g12(x[k]), fmt_g12(y[k]));
    }
    finish(w, path)
}

fn norm_tag(n: Normalization) -> &'static str {
    match n {
        Normalization::Physical => "physical",
        Normalization::Paper => "paper",
    }
}

/// Binary two-photon-amplitude layout: little-endian header
/// `{N_s: u64, N_i: u64, omega_s_first, omega_s_last, omega_i_first,
/// omega_i_last: f64}` followed by row-major interleaved (re, im) f64
/// samples. A JSON sidecar `<path>.json` carries the normalization tag
/// and provenance.
pub fn write_tpa_binary(tpa: &TwoPhotonAmplitude, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let err = |e| Error::io(path.display().to_string(), e);
    let n_s = tpa.n_s() as u64;
    let n_i = tpa.n_i() as u64;
    w.write_all(&n_s.to_le_bytes()).map_err(err)?;
    w.write_all(&n_i.to_le_bytes()).map_err(err)?;
    for v in [
        tpa.grid.omega_s[0],
        *tpa.grid.omega_s.last().unwrap(),
        tpa.grid.omega_i[0],
        *tpa.grid.omega_i.last().unwrap(),
    ] {
        w.write_all(&v.to_le_bytes()).map_err(err)?;
    }
    for v in &tpa.values {
        w.write_all(&v.re.to_le_bytes()).map_err(err)?;
        w.write_all(&v.im.to_le_bytes()).map_err(err)?;
    }
    finish(w, path)?;

    let sidecar = serde_json::json!({
        "format": "randspdc two-photon amplitude v1",
        "normalization": norm_tag(tpa.normalization),
        "omega_p0_rad_per_fs": tpa.omega_p0,
        "n_s": tpa.n_s(),
        "n_i": tpa.n_i(),
        "coarse_grid": tpa.coarse_grid,
    });
    let spath = path.with_extension(format!(
        "{}json",
        path.extension()
            .map(|e| format!("{}.", e.to_string_lossy()))
            .unwrap_or_default()
    ));
    let text = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::json(spath.display().to_string(), e))?;
    std::fs::write(&spath, text + "\n").map_err(|e| Error::io(spath.display().to_string(), e))
}

/// Read an amplitude written by [`write_tpa_binary`], including the
/// sidecar tags.
pub fn read_tpa_binary(path: &Path) -> Result<TwoPhotonAmplitude> {
    let err = |e| Error::io(path.display().to_string(), e);
    let mut file = std::fs::File::open(path).map_err(err)?;
    let mut buf = Vec::new();
    file.read_to_end(&mut buf).map_err(err)?;
    let need = |n: usize| -> Result<()> {
        if buf.len() < n {
            Err(Error::InvalidParameter(format!(
                "{}: truncated amplitude file",
                path.display()
            )))
        } else {
            Ok(())
        }
    };
    need(64)?;
    let u64_at = |o: usize| u64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
    let n_s = u64_at(0) as usize;
    let n_i = u64_at(8) as usize;
    let (s0, s1, i0, i1) = (f64_at(16), f64_at(24), f64_at(32), f64_at(40));
    need(48 + 16 * n_s * n_i)?;
    let values: Vec<Complex64> = (0..n_s * n_i)
        .map(|k| Complex64::new(f64_at(48 + 16 * k), f64_at(56 + 16 * k)))
        .collect();
    let axis = |a: f64, b: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1).max(1) as f64)
            .collect()
    };
    let grid = FrequencyGrid {
        omega_s: axis(s0, s1, n_s),
        omega_i: axis(i0, i1, n_i),
    };
    grid.validate()?;

    let spath = path.with_extension(format!(
        "{}json",
        path.extension()
            .map(|e| format!("{}.", e.to_string_lossy()))
            .unwrap_or_default()
    ));
    let text = std::fs::read_to_string(&spath)
        .map_err(|e| Error::io(spath.display().to_string(), e))?;
    let sidecar: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::json(spath.display().to_string(), e))?;
    let normalization = match sidecar["normalization"].as_str() {
        Some("physical") => Normalization::Physical,
        Some("paper") => Normalization::Paper,
        other => {
            return Err(Error::InvalidParameter(format!(
                "{}: unknown normalization tag {other:?}",
                spath.display()
            )))
        }
    };
    Ok(TwoPhotonAmplitude {
        grid,
        values,
        normalization,
        omega_p0: sidecar["omega_p0_rad_per_fs"].as_f64().ok_or_else(|| {
            Error::InvalidParameter(format!("{}: missing omega_p0", spath.display()))
        })?,
        coarse_grid: sidecar["coarse_grid"].as_bool().unwrap_or(false),
    })
}

/// Schmidt report: `<base>.json` with the weights, entropy, cooperativity
/// and norm, plus per-mode CSV sidecars `<base>_mode_NN_signal.csv` /
/// `_idler.csv` (`omega_rad_per_fs,re,im`) for the `modes` strongest
/// modes.
pub fn write_schmidt(schmidt: &SchmidtResult, base: &Path, modes: usize) -> Result<()> {
    let kept = modes.min(schmidt.weights.len());
    let mut sidecars = Vec::new();
    for n in 0..kept {
        for (tag, axis, samples) in [
            ("signal", &schmidt.grid.omega_s, &schmidt.signal_modes[n]),
            ("idler", &schmidt.grid.omega_i, &schmidt.idler_modes[n]),
        ] {
            let name = format!(
                "{}_mode_{n:02}_{tag}.csv",
                base.file_stem().unwrap_or_default().to_string_lossy()
            );
            let path = base.with_file_name(&name);
            let mut w = create(&path)?;
            out!(w, path, "omega_rad_per_fs,re,im");
            for k in 0..axis.len() {
                out!(
                    w,
                    path,
                    "{},{},{}",
                    fmt_g12(axis[k]),
                    fmt_g12(samples[k].re),
                    fmt_g12(samples[k].im)
                );
            }
            finish(w, path.as_path())?;
            sidecars.push(name);
        }
    }
    let doc = serde_json::json!({
        "weights": schmidt.weights,
        "amplitudes": schmidt.amplitudes,
        "entropy_bits": crate::analysis::entropy(schmidt),
        "cooperativity": crate::analysis::cooperativity(schmidt),
        "norm": schmidt.norm,
        "mode_files": sidecars,
    });
    let jpath = base.with_extension("json");
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::json(jpath.display().to_string(), e))?;
    std::fs::write(&jpath, text + "\n").map_err(|e| Error::io(jpath.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::omega_from_lambda_um;
    use crate::spdc::FrequencyGrid;

    fn sample_tpa() -> TwoPhotonAmplitude {
        let omega0 = omega_from_lambda_um(1.0);
        let grid = FrequencyGrid::degenerate(omega0, 0.02, 64).unwrap();
        let values = (0..64 * 64)
            .map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.7).cos()))
            .collect();
        TwoPhotonAmplitude {
            grid,
            values,
            normalization: Normalization::Paper,
            omega_p0: 2.0 * omega0,
            coarse_grid: true,
        }
    }

    #[test]
    fn tpa_binary_round_trips_exactly() {
        let tpa = sample_tpa();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.bin");
        write_tpa_binary(&tpa, &path).unwrap();
        let back = read_tpa_binary(&path).unwrap();
        assert_eq!(tpa.values, back.values);
        assert_eq!(tpa.normalization, back.normalization);
        assert_eq!(tpa.omega_p0, back.omega_p0);
        assert_eq!(tpa.coarse_grid, back.coarse_grid);
        assert_eq!(tpa.grid.omega_s.len(), back.grid.omega_s.len());
        for (a, b) in tpa.grid.omega_s.iter().zip(&back.grid.omega_s) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_exports_are_byte_stable() {
        let tpa = sample_tpa();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        write_jsi_csv(&tpa, &a).unwrap();
        write_jsi_csv(&tpa, &b).unwrap();
        let bytes_a = std::fs::read(&a).unwrap();
        assert_eq!(bytes_a, std::fs::read(&b).unwrap());
        let text = String::from_utf8(bytes_a).unwrap();
        assert!(text.starts_with("omega_s_rad_per_fs,omega_i_rad_per_fs,abs_phi_sq\n"));
        assert_eq!(text.lines().count(), 1 + 64 * 64);
        // 12 significant digits, uppercase E.
        let first = text.lines().nth(1).unwrap().split(',').next().unwrap();
        assert!(first.contains('E') && !first.contains('e'), "{first}");
    }

    #[test]
    fn schmidt_export_writes_weights_and_mode_files() {
        let tpa = sample_tpa();
        let schmidt = crate::analysis::schmidt_decompose(&tpa).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("schmidt");
        write_schmidt(&schmidt, &base, 3).unwrap();
        let doc: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("schmidt.json")).unwrap(),
        )
        .unwrap();
        assert!(doc["weights"].as_array().unwrap().len() >= 3);
        assert_eq!(doc["mode_files"].as_array().unwrap().len(), 6);
        assert!(dir.path().join("schmidt_mode_00_signal.csv").exists());
        assert!(dir.path().join("schmidt_mode_02_idler.csv").exists());
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let tpa = sample_tpa();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.bin");
        write_tpa_binary(&tpa, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(read_tpa_binary(&path).is_err());
    }
}
