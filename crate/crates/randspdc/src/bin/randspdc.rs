//! Command-line surface of the randspdc library.
//!
//! Units everywhere: lengths in micrometers (um), times in femtoseconds
//! (fs), angular frequencies in rad/fs. Angles are degrees on the command
//! line and radians inside JSON configs. Exit codes: 0 success, 2
//! validation error, 3 numerical failure.

use clap::{Args, Parser, Subcommand};
use randspdc::analysis::{
    cooperativity, entropy, franson_rate, fringe_orientation_deg, hom_rate, photon_flux,
    schmidt_decompose, temporal_amplitude,
};
use randspdc::ensemble::{
    derive_seed, merge_reports, run_campaign, run_campaign_shard, search_structures,
    EnsembleConfig, EnsembleReport, SearchCriteria,
};
use randspdc::io::{
    read_tpa_binary, write_franson_csv, write_hom_csv, write_jsi_csv, write_jti_csv,
    write_marginal_csv, write_peaks_csv, write_relative_csv, write_schmidt, write_spectrum_csv,
    write_tpa_binary, write_xy_csv,
};
use randspdc::localization::localization_length;
use randspdc::peaks::{scan_transmission_peaks, ScanOptions};
use randspdc::spdc::{
    pair_number, reference_amplitude, relative_spectrum, signal_spectrum, superpose_angular_range,
    superpose_pinholes, two_photon_amplitude, EmissionGeometry, FrequencyGrid, Normalization,
    PairPhoton, PumpConfig, SuperpositionSpec,
};
use randspdc::stack::{fmt_g12, generate_random_stack, GeneratorParams, LayerStack};
use randspdc::transfer::transmission_spectrum;
use randspdc::{omega_from_lambda_um, Error, Result};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

const UNITS_HELP: &str = "Units: lengths um, times fs, angular frequencies rad/fs.\n\
Angles are degrees on the command line, radians in JSON configs.\n\
Exit codes: 0 success, 2 validation error, 3 numerical failure.";

#[derive(Parser)]
#[command(
    name = "randspdc",
    version,
    about = "Photon-pair generation in random 1D nonlinear layered structures",
    after_help = UNITS_HELP
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// JSON run configuration; unknown keys are rejected
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Master seed (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random layered structure and write it as JSON
    Generate(GenerateArgs),
    /// Complex transmission spectrum of a structure (CSV)
    Spectrum(SpectrumArgs),
    /// Transmission peaks with FWHM and peak transmittance (CSV)
    Peaks(PeaksArgs),
    /// Ensemble localization length at fixed frequency and angle (JSON)
    Localization(LocalizationArgs),
    /// Two-photon amplitude of a structure (binary + JSON sidecar + CSV)
    Pairgen(PairgenArgs),
    /// Schmidt decomposition and temporal analysis of a stored amplitude
    Analyze(AnalyzeArgs),
    /// Hong-Ou-Mandel coincidence dip of a stored amplitude (CSV)
    Hom(HomArgs),
    /// Franson interferogram of a stored amplitude (CSV + JSON)
    Franson(FransonArgs),
    /// Pinhole or angular-range superposition of amplitudes
    Superpose(SuperposeArgs),
    /// Monte Carlo campaign over random structures
    Ensemble(EnsembleArgs),
    /// Search random structures for matching transmission-peak systems
    Search(SearchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of quarter-wave elementary slots
    #[arg(long, default_value_t = 250)]
    n_elem: usize,
    /// Boundary jitter standard deviation, um (defaults to FWHM lambda0/40)
    #[arg(long)]
    jitter: Option<f64>,
    /// Design wavelength, um
    #[arg(long, default_value_t = 1.0)]
    lambda0: f64,
    /// Output file name inside --out
    #[arg(long, default_value = "structure.json")]
    name: String,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Structure JSON file (otherwise taken from the config)
    #[arg(long)]
    structure: Option<PathBuf>,
    /// Lower band edge, rad/fs (default 0.95 * omega0)
    #[arg(long)]
    band_lo: Option<f64>,
    /// Upper band edge, rad/fs (default 1.05 * omega0)
    #[arg(long)]
    band_hi: Option<f64>,
    /// Samples across the band
    #[arg(long, default_value_t = 4001)]
    points: usize,
    /// External angle, degrees
    #[arg(long, default_value_t = 0.0)]
    theta_deg: f64,
}

#[derive(Args)]
struct PeaksArgs {
    #[arg(long)]
    structure: Option<PathBuf>,
    #[arg(long)]
    band_lo: Option<f64>,
    #[arg(long)]
    band_hi: Option<f64>,
    /// External angle, degrees
    #[arg(long, default_value_t = 0.0)]
    theta_deg: f64,
}

#[derive(Args)]
struct LocalizationArgs {
    /// Structures in the ensemble (at least 100)
    #[arg(long, default_value_t = 250)]
    count: usize,
    #[arg(long, default_value_t = 250)]
    n_elem: usize,
    /// External angle, degrees
    #[arg(long, default_value_t = 0.0)]
    theta_deg: f64,
    /// Probe frequency, rad/fs (default omega0 of lambda0 = 1 um)
    #[arg(long)]
    omega: Option<f64>,
}

#[derive(Args)]
struct PairgenArgs {
    #[arg(long)]
    structure: Option<PathBuf>,
    /// Signal external emission angle, degrees
    #[arg(long, default_value_t = 0.0)]
    theta_s_deg: f64,
    /// Signal grid center, rad/fs (default omega0)
    #[arg(long)]
    center_s: Option<f64>,
    /// Idler grid center, rad/fs (default equal to the signal center)
    #[arg(long)]
    center_i: Option<f64>,
    /// Half-width of each frequency axis, rad/fs
    #[arg(long, default_value_t = 0.02)]
    half_span: f64,
    /// Grid points per axis (at least 64)
    #[arg(long, default_value_t = 128)]
    n_grid: usize,
    /// Pump intensity FWHM, fs
    #[arg(long, default_value_t = 250.0)]
    pump_fwhm_fs: f64,
    /// Rescale to the paper normalization before writing
    #[arg(long)]
    paper_norm: bool,
    /// Also export the spectrum relative to the homogeneous reference
    #[arg(long)]
    relative: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Stored two-photon amplitude (written by pairgen/superpose)
    #[arg(long)]
    amplitude: PathBuf,
    /// Run the Schmidt decomposition (default when nothing is selected)
    #[arg(long)]
    schmidt: bool,
    /// Schmidt modes exported as CSV sidecars
    #[arg(long, default_value_t = 8)]
    modes: usize,
    /// Transform to the time domain over this window, fs
    #[arg(long)]
    temporal_window: Option<f64>,
    /// Time samples per axis for the temporal transform
    #[arg(long, default_value_t = 256)]
    n_time: usize,
}

#[derive(Args)]
struct HomArgs {
    #[arg(long)]
    amplitude: PathBuf,
    /// Delays run over [-tau-max, tau-max], fs
    #[arg(long, default_value_t = 2000.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 401)]
    n_tau: usize,
}

#[derive(Args)]
struct FransonArgs {
    #[arg(long)]
    amplitude: PathBuf,
    /// Lowest delay on both axes, fs
    #[arg(long, default_value_t = 0.0)]
    tau_min: f64,
    /// Highest delay on both axes, fs
    #[arg(long, default_value_t = 2000.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 96)]
    n_tau: usize,
}

#[derive(Args)]
struct SuperposeArgs {
    /// Stored amplitude (pinhole mode)
    #[arg(long, conflicts_with = "structure")]
    amplitude: Option<PathBuf>,
    /// Number of pinholes
    #[arg(long)]
    pinholes: Option<usize>,
    /// Pinhole central-frequency spacing, rad/fs
    #[arg(long)]
    spacing: Option<f64>,
    /// Phase step between adjacent pinholes, rad
    #[arg(long, default_value_t = 0.0)]
    phase_step: f64,
    /// Structure JSON (angular-range mode)
    #[arg(long)]
    structure: Option<PathBuf>,
    /// Angular range, degrees (angular-range mode)
    #[arg(long)]
    theta_min_deg: Option<f64>,
    #[arg(long)]
    theta_max_deg: Option<f64>,
    #[arg(long, default_value_t = 48)]
    n_angles: usize,
    /// Grid center per axis, rad/fs (default omega0)
    #[arg(long)]
    center: Option<f64>,
    #[arg(long, default_value_t = 0.02)]
    half_span: f64,
    #[arg(long, default_value_t = 128)]
    n_grid: usize,
    /// Pump intensity FWHM, fs (angular-range mode)
    #[arg(long, default_value_t = 250.0)]
    pump_fwhm_fs: f64,
}

#[derive(Args)]
struct EnsembleArgs {
    /// Run only this shard (requires --of)
    #[arg(long, requires = "of")]
    shard: Option<u64>,
    /// Total shard count
    #[arg(long)]
    of: Option<u64>,
    /// Merge previously saved shard directories instead of computing
    #[arg(long, num_args = 1.., conflicts_with_all = ["shard", "of"])]
    merge: Vec<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    /// Structures to examine before giving up
    #[arg(long, default_value_t = 10000)]
    budget: u64,
    /// Stop after this many matches
    #[arg(long, default_value_t = 1)]
    max_matches: usize,
}

/// Top-level JSON run configuration; every section is optional and
/// unknown keys are rejected at every level.
#[derive(Default, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    generator: Option<GeneratorParams>,
    structure_file: Option<PathBuf>,
    pump: Option<PumpConfig>,
    geometry: Option<EmissionGeometry>,
    ensemble: Option<EnsembleConfig>,
    search: Option<SearchCriteria>,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    });
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(sha256_hex(&bytes))
}

/// Echo the provenance block: command, version, seed, and a digest of
/// every input file.
fn provenance(command: &str, seed: u64, inputs: &[&Path]) -> Result<()> {
    let mut digests = serde_json::Map::new();
    for path in inputs {
        digests.insert(
            path.display().to_string(),
            serde_json::Value::String(file_digest(path)?),
        );
    }
    let block = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "inputs": digests,
    });
    println!("{block}");
    Ok(())
}

fn load_config(global: &GlobalArgs) -> Result<RunConfig> {
    match &global.config {
        None => Ok(RunConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
        }
    }
}

/// Structure from an explicit flag, the config's structure file, or the
/// config's generator section (seed overridable with --seed).
fn load_structure(
    global: &GlobalArgs,
    config: &RunConfig,
    flag: &Option<PathBuf>,
) -> Result<(LayerStack, Vec<PathBuf>)> {
    let path = flag.clone().or_else(|| config.structure_file.clone());
    if let Some(path) = path {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        return Ok((LayerStack::from_json(&text)?, vec![path]));
    }
    if let Some(generator) = &config.generator {
        let mut params = generator.clone();
        if let Some(seed) = global.seed {
            params.seed = seed;
        }
        return Ok((generate_random_stack(&params)?, vec![]));
    }
    Err(Error::InvalidParameter(
        "no structure: pass --structure or provide structure_file/generator in the config".into(),
    ))
}

fn out_path(global: &GlobalArgs, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&global.out)
        .map_err(|e| Error::io(global.out.display().to_string(), e))?;
    Ok(global.out.join(name))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::json(path.display().to_string(), e))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path.display().to_string(), e))
}

fn band_of(lo: Option<f64>, hi: Option<f64>) -> (f64, f64) {
    let omega0 = omega_from_lambda_um(1.0);
    (lo.unwrap_or(0.95 * omega0), hi.unwrap_or(1.05 * omega0))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1).max(1) as f64)
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    if cli.global.threads > 0 {
        // Ignore "already set": tests may initialize the pool first.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global();
    }
    let config = load_config(&cli.global)?;
    let seed = cli.global.seed.unwrap_or(0);
    let config_inputs: Vec<&Path> = cli.global.config.iter().map(PathBuf::as_path).collect();

    match &cli.command {
        Command::Generate(args) => {
            let mut params = config
                .generator
                .clone()
                .unwrap_or_else(|| GeneratorParams::new(args.n_elem, seed));
            params.n_elem = args.n_elem;
            params.lambda0_um = args.lambda0;
            if let Some(j) = args.jitter {
                params.jitter_sigma_um = j;
            }
            if let Some(s) = cli.global.seed {
                params.seed = s;
            }
            let stack = generate_random_stack(&params)?;
            let path = out_path(&cli.global, &args.name)?;
            std::fs::write(&path, stack.to_json())
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            provenance("generate", params.seed, &config_inputs)?;
            let omega0 = omega_from_lambda_um(params.lambda0_um);
            println!(
                "optical_length_um,{}",
                fmt_g12(stack.optical_length_um(omega0)?)
            );
            println!("boundary_count,{}", stack.boundary_count());
            println!("wrote {}", path.display());
        }

        Command::Spectrum(args) => {
            let (stack, inputs) = load_structure(&cli.global, &config, &args.structure)?;
            let band = band_of(args.band_lo, args.band_hi);
            if args.points < 2 {
                return Err(Error::InvalidParameter("points must be >= 2".into()));
            }
            let grid = linspace(band.0, band.1, args.points);
            let spectrum =
                transmission_spectrum(&stack, &grid, args.theta_deg.to_radians())?;
            let path = out_path(&cli.global, "spectrum.csv")?;
            write_spectrum_csv(&spectrum, &path)?;
            let all: Vec<&Path> = config_inputs
                .iter()
                .copied()
                .chain(inputs.iter().map(PathBuf::as_path))
                .collect();
            provenance("spectrum", seed, &all)?;
            println!("wrote {}", path.display());
        }

        Command::Peaks(args) => {
            let (stack, inputs) = load_structure(&cli.global, &config, &args.structure)?;
            let band = band_of(args.band_lo, args.band_hi);
            let set = scan_transmission_peaks(
                &stack,
                band,
                args.theta_deg.to_radians(),
                &ScanOptions::default(),
            )?;
            let path = out_path(&cli.global, "peaks.csv")?;
            write_peaks_csv(&set, &path)?;
            let all: Vec<&Path> = config_inputs
                .iter()
                .copied()
                .chain(inputs.iter().map(PathBuf::as_path))
                .collect();
            provenance("peaks", seed, &all)?;
            println!("peaks,{}", set.peaks.len());
            println!("wrote {}", path.display());
        }

        Command::Localization(args) => {
            let omega = args.omega.unwrap_or_else(|| omega_from_lambda_um(1.0));
            let stacks: Vec<LayerStack> = (0..args.count as u64)
                .map(|i| {
                    generate_random_stack(&GeneratorParams::new(
                        args.n_elem,
                        derive_seed(seed, i),
                    ))
                })
                .collect::<Result<_>>()?;
            let est = localization_length(&stacks, omega, args.theta_deg.to_radians())?;
            let path = out_path(&cli.global, "localization.json")?;
            write_json(
                &path,
                &serde_json::json!({
                    "omega_rad_per_fs": omega,
                    "theta_deg": args.theta_deg,
                    "xi_um": est.xi_um.is_finite().then_some(est.xi_um),
                    "stderr_um": est.stderr_um,
                    "count": est.count,
                    "excluded": est.excluded,
                }),
            )?;
            provenance("localization", seed, &config_inputs)?;
            println!("xi_um,{}", fmt_g12(est.xi_um));
            println!("wrote {}", path.display());
        }

        Command::Pairgen(args) => {
            let (stack, inputs) = load_structure(&cli.global, &config, &args.structure)?;
            let omega0 = omega_from_lambda_um(1.0);
            let center_s = args.center_s.unwrap_or(omega0);
            let center_i = args.center_i.unwrap_or(center_s);
            let grid = FrequencyGrid::uniform(
                center_s,
                args.half_span,
                args.n_grid,
                center_i,
                args.half_span,
                args.n_grid,
            )?;
            let mut pump = config
                .pump
                .clone()
                .unwrap_or_else(|| PumpConfig::new(center_s + center_i));
            pump.duration_fwhm_fs = args.pump_fwhm_fs;
            let geometry = config
                .geometry
                .clone()
                .unwrap_or_else(|| EmissionGeometry::new(args.theta_s_deg.to_radians()));
            let mut tpa = two_photon_amplitude(&stack, &pump, &geometry, &grid)?;
            let pairs = pair_number(&tpa)?;
            if args.paper_norm {
                tpa = tpa.into_paper_normalized()?;
            }
            let bin = out_path(&cli.global, "phi.bin")?;
            write_tpa_binary(&tpa, &bin)?;
            write_jsi_csv(&tpa, &out_path(&cli.global, "jsi.csv")?)?;
            write_marginal_csv(
                &signal_spectrum(&tpa),
                &out_path(&cli.global, "signal_spectrum.csv")?,
            )?;
            if args.relative {
                let reference = reference_amplitude(&stack, &pump, &grid)?;
                let rel = relative_spectrum(&tpa, &reference)?;
                write_relative_csv(&rel, &out_path(&cli.global, "relative_spectrum.csv")?)?;
                println!("max_relative,{}", fmt_g12(rel.max_ratio()));
            }
            let all: Vec<&Path> = config_inputs
                .iter()
                .copied()
                .chain(inputs.iter().map(PathBuf::as_path))
                .collect();
            provenance("pairgen", seed, &all)?;
            println!("pair_number,{}", fmt_g12(pairs));
            if tpa.coarse_grid {
                eprintln!("warning: grid undersamples the narrowest spectral feature");
            }
            println!("wrote {}", bin.display());
        }

        Command::Analyze(args) => {
            let tpa = read_tpa_binary(&args.amplitude)?;
            let mut report = serde_json::Map::new();
            let do_schmidt = args.schmidt || args.temporal_window.is_none();
            if do_schmidt {
                let schmidt = schmidt_decompose(&tpa)?;
                let base = out_path(&cli.global, "schmidt")?;
                write_schmidt(&schmidt, &base, args.modes)?;
                report.insert("entropy_bits".into(), entropy(&schmidt).into());
                report.insert("cooperativity".into(), cooperativity(&schmidt).into());
                report.insert(
                    "leading_weights".into(),
                    schmidt.weights.iter().take(8).cloned().collect::<Vec<_>>().into(),
                );
            }
            if tpa.normalization == Normalization::Physical {
                report.insert("pair_number".into(), pair_number(&tpa)?.into());
            }
            if let Some(window) = args.temporal_window {
                let temporal = temporal_amplitude(&tpa, window, args.n_time)?;
                write_jti_csv(&temporal, &out_path(&cli.global, "jti.csv")?)?;
                let flux = photon_flux(&temporal, PairPhoton::Signal);
                write_xy_csv(
                    "t_fs,flux_ev_per_fs",
                    &flux.t_fs,
                    &flux.values,
                    &out_path(&cli.global, "signal_flux.csv")?,
                )?;
                report.insert(
                    "temporal_aliasing_warning".into(),
                    temporal.aliasing_warning.into(),
                );
            }
            let path = out_path(&cli.global, "analyze.json")?;
            write_json(&path, &serde_json::Value::Object(report))?;
            let all: Vec<&Path> = config_inputs
                .iter()
                .copied()
                .chain(std::iter::once(args.amplitude.as_path()))
                .collect();
            provenance("analyze", seed, &all)?;
            println!("wrote {}", path.display());
        }

        Command::Hom(args) => {
            let tpa = read_tpa_binary(&args.amplitude)?;
            let taus = linspace(-args.tau_max, args.tau_max, args.n_tau);
            let pattern = hom_rate(&tpa, &taus)?;
            let path = out_path(&cli.global, "hom.csv")?;
            write_hom_csv(&pattern, &path)?;
            let (k_min, r_min) = pattern
                .rate
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(k, &r)| (k, r))
                .unwrap();
            provenance("hom", seed, &[args.amplitude.as_path()])?;
            println!("min_rate,{}", fmt_g12(r_min));
            println!("min_rate_tau_fs,{}", fmt_g12(pattern.tau_fs[k_min]));
            println!("wrote {}", path.display());
        }

        Command::Franson(args) => {
            let tpa = read_tpa_binary(&args.amplitude)?;
            let taus = linspace(args.tau_min, args.tau_max, args.n_tau);
            let pattern = franson_rate(&tpa, &taus, &taus)?;
            let path = out_path(&cli.global, "franson.csv")?;
            write_franson_csv(&pattern, &path)?;
            let orientation = fringe_orientation_deg(&pattern);
            write_json(
                &out_path(&cli.global, "franson.json")?,
                &serde_json::json!({
                    "fringe_orientation_deg": orientation,
                    "rate_at_first_delays": pattern.at(0, 0),
                }),
            )?;
            provenance("franson", seed, &[args.amplitude.as_path()])?;
            println!("fringe_orientation_deg,{}", fmt_g12(orientation));
            println!("wrote {}", path.display());
        }

        Command::Superpose(args) => {
            let (tpa, inputs) = match (&args.amplitude, args.pinholes) {
                (Some(path), Some(m)) => {
                    let spacing = args.spacing.ok_or_else(|| {
                        Error::InvalidParameter("pinhole mode needs --spacing".into())
                    })?;
                    let base = read_tpa_binary(path)?;
                    let spec = SuperpositionSpec::Pinholes {
                        m,
                        delta_omega: spacing,
                        phase_step: args.phase_step,
                    };
                    (superpose_pinholes(&base, &spec)?, vec![path.clone()])
                }
                (None, None) => {
                    let (theta_min, theta_max) = match (args.theta_min_deg, args.theta_max_deg)
                    {
                        (Some(lo), Some(hi)) => (lo, hi),
                        _ => {
                            return Err(Error::InvalidParameter(
                                "angular mode needs --theta-min-deg and --theta-max-deg"
                                    .into(),
                            ))
                        }
                    };
                    let (stack, inputs) =
                        load_structure(&cli.global, &config, &args.structure)?;
                    let center = args.center.unwrap_or_else(|| omega_from_lambda_um(1.0));
                    let grid =
                        FrequencyGrid::degenerate(center, args.half_span, args.n_grid)?;
                    let mut pump = config
                        .pump
                        .clone()
                        .unwrap_or_else(|| PumpConfig::new(2.0 * center));
                    pump.duration_fwhm_fs = args.pump_fwhm_fs;
                    let spec = SuperpositionSpec::AngularRange {
                        theta_min: theta_min.to_radians(),
                        theta_max: theta_max.to_radians(),
                        n_angles: args.n_angles,
                    };
                    let sup = superpose_angular_range(&stack, &pump, &spec, &grid)?;
                    println!(
                        "compensation_slope_rad_per_rad,{}",
                        fmt_g12(sup.compensation_slope)
                    );
                    (sup.amplitude, inputs)
                }
                _ => {
                    return Err(Error::InvalidParameter(
                        "use --amplitude with --pinholes, or --structure with an angular range"
                            .into(),
                    ))
                }
            };
            let bin = out_path(&cli.global, "superposed.bin")?;
            write_tpa_binary(&tpa, &bin)?;
            write_jsi_csv(&tpa, &out_path(&cli.global, "superposed_jsi.csv")?)?;
            let all: Vec<&Path> = config_inputs
                .iter()
                .copied()
                .chain(inputs.iter().map(PathBuf::as_path))
                .collect();
            provenance("superpose", seed, &all)?;
            println!("wrote {}", bin.display());
        }

        Command::Ensemble(args) => {
            if !args.merge.is_empty() {
                let mut merged: Option<EnsembleReport> = None;
                for dir in &args.merge {
                    let shard = EnsembleReport::load(dir)?;
                    merged = Some(match merged {
                        None => shard,
                        Some(acc) => merge_reports(&acc, &shard)?,
                    });
                }
                let report = merged.unwrap();
                let dir = out_path(&cli.global, "campaign")?;
                report.save(&dir)?;
                provenance("ensemble", report.config.master_seed, &config_inputs)?;
                println!("structures,{}", report.records.len());
                println!("wrote {}", dir.display());
                return Ok(());
            }
            let mut econfig = config.ensemble.clone().ok_or_else(|| {
                Error::InvalidParameter("the config needs an \"ensemble\" section".into())
            })?;
            if let Some(s) = cli.global.seed {
                econfig.master_seed = s;
            }
            if cli.global.threads > 0 {
                econfig.workers = cli.global.threads;
            }
            let report = match (args.shard, args.of) {
                (Some(shard), Some(of)) => run_campaign_shard(&econfig, shard, of)?,
                _ => run_campaign(&econfig)?,
            };
            let dir = out_path(&cli.global, "campaign")?;
            report.save(&dir)?;
            provenance("ensemble", econfig.master_seed, &config_inputs)?;
            println!("config_digest,{}", report.config_digest);
            println!("structures,{}", report.records.len());
            println!("failures,{}", report.failures.len());
            println!("wrote {}", dir.display());
        }

        Command::Search(args) => {
            let mut econfig = config.ensemble.clone().ok_or_else(|| {
                Error::InvalidParameter("the config needs an \"ensemble\" section".into())
            })?;
            if let Some(s) = cli.global.seed {
                econfig.master_seed = s;
            }
            let criteria = config.search.clone().ok_or_else(|| {
                Error::InvalidParameter("the config needs a \"search\" section".into())
            })?;
            let outcome =
                search_structures(&econfig, &criteria, args.budget, args.max_matches)?;
            let mut matches = Vec::new();
            for (k, m) in outcome.matches.iter().enumerate() {
                let name = format!("match_{k:03}.json");
                let path = out_path(&cli.global, &name)?;
                std::fs::write(&path, m.stack.to_json())
                    .map_err(|e| Error::io(path.display().to_string(), e))?;
                matches.push(serde_json::json!({
                    "index": m.index,
                    "seed": m.seed,
                    "structure_file": name,
                    "peaks": m.peaks,
                }));
            }
            write_json(
                &out_path(&cli.global, "matches.json")?,
                &serde_json::json!({
                    "examined": outcome.examined,
                    "acceptance_rate": outcome.acceptance_rate,
                    "matches": matches,
                }),
            )?;
            provenance("search", econfig.master_seed, &config_inputs)?;
            println!("matches,{}", outcome.matches.len());
            println!("examined,{}", outcome.examined);
        }
    }
    Ok(())
}
