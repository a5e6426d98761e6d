//! Seeded Monte Carlo campaigns over random structures: peak-width
//! statistics, localization estimates, structure search, persistence.
//!
//! Every structure is a pure function of `(master_seed, index)`, so a
//! campaign can be sharded across workers or processes and merged back
//! into a report that is bit-identical to the monolithic run.

use crate::localization::{estimate_from_samples, LocalizationEstimate};
use crate::peaks::{scan_transmission_peaks, Peak, ScanOptions};
use crate::stack::{generate_random_stack, GeneratorParams, LayerStack};
use crate::transfer::transmittance_at;
use crate::{omega_from_lambda_um, Error, Result};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-structure seed from the campaign master seed and structure index,
/// a SplitMix-style finalizer: neighboring indices give uncorrelated
/// generator streams without any coordination between workers.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    mix64(master_seed ^ mix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

/// Campaign definition. `count` structures are generated for every entry
/// of `n_elem`, and each structure is probed at every angle in
/// `theta_ext`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub master_seed: u64,
    /// Structures per n_elem cell.
    pub count: u64,
    pub n_elem: Vec<usize>,
    /// External probe angles, rad.
    pub theta_ext: Vec<f64>,
    /// Probe band (omega_lo, omega_hi), rad/fs.
    pub band: (f64, f64),
    /// Peak-FWHM histogram bin edges, nm, strictly increasing.
    pub bin_edges_nm: Vec<f64>,
    /// Requested parallelism; 0 takes the global thread-pool default.
    pub workers: usize,
    pub lambda0_um: f64,
    pub jitter_sigma_um: f64,
}

impl EnsembleConfig {
    pub fn new(master_seed: u64, count: u64) -> EnsembleConfig {
        let omega0 = omega_from_lambda_um(1.0);
        let gen = GeneratorParams::new(250, 0);
        EnsembleConfig {
            master_seed,
            count,
            n_elem: vec![250],
            theta_ext: vec![0.0],
            band: (0.98 * omega0, 1.02 * omega0),
            bin_edges_nm: default_bin_edges_nm(),
            workers: 0,
            lambda0_um: gen.lambda0_um,
            jitter_sigma_um: gen.jitter_sigma_um,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 1 {
            return Err(Error::InvalidParameter("count must be >= 1".into()));
        }
        if self.n_elem.is_empty() || self.theta_ext.is_empty() {
            return Err(Error::InvalidParameter(
                "n_elem and theta_ext must be non-empty".into(),
            ));
        }
        if !(self.band.1 > self.band.0) {
            return Err(Error::InvalidParameter(
                "probe band must have omega_hi > omega_lo".into(),
            ));
        }
        if self.bin_edges_nm.len() < 2
            || self
                .bin_edges_nm
                .windows(2)
                .any(|w| !(w[1] > w[0]) || !(w[0] > 0.0))
        {
            return Err(Error::InvalidParameter(
                "bin edges must be positive and strictly increasing".into(),
            ));
        }
        for &ne in &self.n_elem {
            GeneratorParams {
                lambda0_um: self.lambda0_um,
                n_elem: ne,
                jitter_sigma_um: self.jitter_sigma_um,
                seed: 0,
            }
            .validate()?;
        }
        Ok(())
    }

    /// The config with execution hints stripped: two campaigns are
    /// mergeable iff their identities are equal.
    pub fn identity(&self) -> EnsembleConfig {
        let mut id = self.clone();
        id.workers = 0;
        id
    }

    /// SHA-256 hex digest of the canonical JSON of the identity config.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(&self.identity()).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn total_jobs(&self) -> u64 {
        self.n_elem.len() as u64 * self.count
    }

    /// Cell (n_elem entry) and within-cell position of a global index.
    fn job(&self, index: u64) -> (usize, u64) {
        ((index / self.count) as usize, index % self.count)
    }
}

/// Log-spaced bin edges over FWHM in [1e-3, 10] nm: random-stack peak
/// widths span several orders of magnitude.
pub fn default_bin_edges_nm() -> Vec<f64> {
    let n_bins = 52;
    (0..=n_bins)
        .map(|i| 10f64.powf(-3.0 + 4.0 * i as f64 / n_bins as f64))
        .collect()
}

/// Probe results for one structure at one external angle.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ThetaRecord {
    /// ln T at the band midpoint; absent when T underflowed to zero.
    pub ln_t: Option<f64>,
    /// Projected optical length at the band midpoint, um.
    pub l_opt_um: f64,
    /// FWHM of every detected transmission peak, nm.
    pub fwhm_nm: Vec<f64>,
    /// Peak candidates the scan could not bracket.
    pub scan_dropped: u64,
}

/// Everything recorded about one structure; reproducible from
/// `(master_seed, index)` alone.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StructureRecord {
    pub index: u64,
    pub seed: u64,
    pub n_elem: usize,
    /// One entry per config angle, in config order.
    pub theta: Vec<ThetaRecord>,
}

/// A structure whose evaluation failed; recorded and skipped.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FailureRecord {
    pub index: u64,
    pub seed: u64,
    pub n_elem: usize,
    pub message: String,
}

/// Campaign output: per-structure records sorted by index plus the
/// provenance needed to reproduce or extend them.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnsembleReport {
    pub config: EnsembleConfig,
    pub config_digest: String,
    pub records: Vec<StructureRecord>,
    pub failures: Vec<FailureRecord>,
}

/// Aggregated statistics for one (n_elem, theta) cell.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CellSummary {
    pub n_elem: usize,
    pub theta_ext: f64,
    pub structures: u64,
    /// Peaks detected in this cell.
    pub peak_count: u64,
    /// Peaks per FWHM bin; peak_count = sum(bin_counts) + out_of_range.
    pub bin_counts: Vec<u64>,
    /// Probability-normalized histogram over the in-range peaks.
    pub probability: Vec<f64>,
    pub out_of_range: u64,
    pub scan_dropped: u64,
    pub median_fwhm_nm: Option<f64>,
    pub localization: LocalizationEstimate,
}

fn evaluate_structure(
    config: &EnsembleConfig,
    index: u64,
) -> std::result::Result<StructureRecord, FailureRecord> {
    let (cell, _) = config.job(index);
    let n_elem = config.n_elem[cell];
    let seed = derive_seed(config.master_seed, index);
    let inner = || -> Result<Vec<ThetaRecord>> {
        let stack = generate_random_stack(&GeneratorParams {
            lambda0_um: config.lambda0_um,
            n_elem,
            jitter_sigma_um: config.jitter_sigma_um,
            seed,
        })?;
        let omega_mid = 0.5 * (config.band.0 + config.band.1);
        let mut out = Vec::with_capacity(config.theta_ext.len());
        for &theta in &config.theta_ext {
            let t = transmittance_at(&stack, omega_mid, theta)?;
            let set =
                scan_transmission_peaks(&stack, config.band, theta, &ScanOptions::default())?;
            out.push(ThetaRecord {
                ln_t: (t > 0.0).then(|| t.ln()),
                l_opt_um: stack.projected_optical_length_um(omega_mid, theta)?,
                fwhm_nm: set.peaks.iter().map(|p| p.fwhm_lambda_nm).collect(),
                scan_dropped: set.dropped as u64,
            });
        }
        Ok(out)
    };
    match inner() {
        Ok(theta) => Ok(StructureRecord {
            index,
            seed,
            n_elem,
            theta,
        }),
        Err(e) => Err(FailureRecord {
            index,
            seed,
            n_elem,
            message: e.to_string(),
        }),
    }
}

fn run_indices(config: &EnsembleConfig, indices: Vec<u64>) -> Result<EnsembleReport> {
    config.validate()?;
    let work = || {
        indices
            .par_iter()
            .map(|&i| evaluate_structure(config, i))
            .collect::<Vec<_>>()
    };
    let results = if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(work)
    } else {
        work()
    };
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(f) => failures.push(f),
        }
    }
    records.sort_by_key(|r| r.index);
    failures.sort_by_key(|f| f.index);
    Ok(EnsembleReport {
        config_digest: config.digest(),
        config: config.identity(),
        records,
        failures,
    })
}

/// Run the whole campaign. The report is independent of execution order
/// and worker count.
pub fn run_campaign(config: &EnsembleConfig) -> Result<EnsembleReport> {
    run_indices(config, (0..config.total_jobs()).collect())
}

/// Run the shard `shard` of `num_shards`: global indices congruent to
/// `shard` modulo `num_shards`. Merging all shards reproduces the
/// monolithic campaign bit-for-bit.
pub fn run_campaign_shard(
    config: &EnsembleConfig,
    shard: u64,
    num_shards: u64,
) -> Result<EnsembleReport> {
    if num_shards < 1 || shard >= num_shards {
        return Err(Error::InvalidParameter(format!(
            "shard {shard} of {num_shards} is out of range"
        )));
    }
    run_indices(
        config,
        (0..config.total_jobs())
            .filter(|i| i % num_shards == shard)
            .collect(),
    )
}

/// Count-weighted merge; associative and commutative. The inputs must
/// come from the same campaign identity and cover disjoint index sets.
pub fn merge_reports(a: &EnsembleReport, b: &EnsembleReport) -> Result<EnsembleReport> {
    if a.config.identity() != b.config.identity() {
        return Err(Error::IncompatibleReports(
            "campaign configs differ (binning, band, angles, sizes or seeds)".into(),
        ));
    }
    let mut records = a.records.clone();
    records.extend(b.records.iter().cloned());
    records.sort_by_key(|r| r.index);
    if records.windows(2).any(|w| w[0].index == w[1].index) {
        return Err(Error::IncompatibleReports(
            "shards overlap: duplicate structure index".into(),
        ));
    }
    let mut failures = a.failures.clone();
    failures.extend(b.failures.iter().cloned());
    failures.sort_by_key(|f| f.index);
    Ok(EnsembleReport {
        config: a.config.identity(),
        config_digest: a.config_digest.clone(),
        records,
        failures,
    })
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

impl EnsembleReport {
    /// A report of the same campaign with no structures; the identity of
    /// `merge_reports`.
    pub fn empty(config: &EnsembleConfig) -> EnsembleReport {
        EnsembleReport {
            config_digest: config.digest(),
            config: config.identity(),
            records: Vec::new(),
            failures: Vec::new(),
        }
    }

    /// Aggregate every (n_elem, theta) cell: FWHM histogram, median
    /// width, and the localization estimate.
    pub fn summaries(&self) -> Vec<CellSummary> {
        let edges = &self.config.bin_edges_nm;
        let n_bins = edges.len() - 1;
        let mut out = Vec::new();
        for &n_elem in &self.config.n_elem {
            for (ti, &theta) in self.config.theta_ext.iter().enumerate() {
                let mut bin_counts = vec![0u64; n_bins];
                let mut out_of_range = 0u64;
                let mut scan_dropped = 0u64;
                let mut widths = Vec::new();
                let mut loc_samples = Vec::new();
                let mut loc_excluded = 0usize;
                let mut structures = 0u64;
                for rec in self.records.iter().filter(|r| r.n_elem == n_elem) {
                    structures += 1;
                    let th = &rec.theta[ti];
                    scan_dropped += th.scan_dropped;
                    match th.ln_t {
                        Some(ln_t) => loc_samples.push((th.l_opt_um, ln_t)),
                        None => loc_excluded += 1,
                    }
                    for &w in &th.fwhm_nm {
                        widths.push(w);
                        // Bin by binary search over the edges.
                        match edges.binary_search_by(|e| e.total_cmp(&w)) {
                            Ok(i) if i < n_bins => bin_counts[i] += 1,
                            Err(i) if i > 0 && i <= n_bins => bin_counts[i - 1] += 1,
                            _ => out_of_range += 1,
                        }
                    }
                }
                let in_range: u64 = bin_counts.iter().sum();
                let probability = bin_counts
                    .iter()
                    .map(|&c| {
                        if in_range > 0 {
                            c as f64 / in_range as f64
                        } else {
                            0.0
                        }
                    })
                    .collect();
                out.push(CellSummary {
                    n_elem,
                    theta_ext: theta,
                    structures,
                    peak_count: widths.len() as u64,
                    bin_counts,
                    probability,
                    out_of_range,
                    scan_dropped,
                    median_fwhm_nm: median(widths),
                    localization: estimate_from_samples(&loc_samples, loc_excluded),
                });
            }
        }
        out
    }

    /// Persist under `dir`: `structures.jsonl` (one record per line),
    /// `failures.jsonl`, and `aggregate.json` with config, digest and
    /// per-cell summaries.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let jsonl = dir.join("structures.jsonl");
        let mut w = BufWriter::new(
            std::fs::File::create(&jsonl).map_err(|e| Error::io(jsonl.display().to_string(), e))?,
        );
        for rec in &self.records {
            let line = serde_json::to_string(rec)
                .map_err(|e| Error::json(jsonl.display().to_string(), e))?;
            writeln!(w, "{line}").map_err(|e| Error::io(jsonl.display().to_string(), e))?;
        }
        w.flush().map_err(|e| Error::io(jsonl.display().to_string(), e))?;

        let fpath = dir.join("failures.jsonl");
        let mut w = BufWriter::new(
            std::fs::File::create(&fpath).map_err(|e| Error::io(fpath.display().to_string(), e))?,
        );
        for f in &self.failures {
            let line = serde_json::to_string(f)
                .map_err(|e| Error::json(fpath.display().to_string(), e))?;
            writeln!(w, "{line}").map_err(|e| Error::io(fpath.display().to_string(), e))?;
        }
        w.flush().map_err(|e| Error::io(fpath.display().to_string(), e))?;

        let agg = serde_json::json!({
            "config": self.config,
            "config_digest": self.config_digest,
            "structures": self.records.len(),
            "failures": self.failures.len(),
            "summaries": self.summaries(),
        });
        let apath = dir.join("aggregate.json");
        let text = serde_json::to_string_pretty(&agg)
            .map_err(|e| Error::json(apath.display().to_string(), e))?;
        std::fs::write(&apath, text + "\n")
            .map_err(|e| Error::io(apath.display().to_string(), e))
    }

    /// Load a report saved by [`EnsembleReport::save`].
    pub fn load(dir: &Path) -> Result<EnsembleReport> {
        let apath = dir.join("aggregate.json");
        let text = std::fs::read_to_string(&apath)
            .map_err(|e| Error::io(apath.display().to_string(), e))?;
        let agg: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::json(apath.display().to_string(), e))?;
        let config: EnsembleConfig = serde_json::from_value(agg["config"].clone())
            .map_err(|e| Error::json(apath.display().to_string(), e))?;
        let config_digest = agg["config_digest"]
            .as_str()
            .ok_or_else(|| Error::InvalidParameter("aggregate.json lacks config_digest".into()))?
            .to_string();

        let read_lines = |name: &str| -> Result<Vec<String>> {
            let path = dir.join(name);
            let file = std::fs::File::open(&path)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            BufReader::new(file)
                .lines()
                .map(|l| l.map_err(|e| Error::io(path.display().to_string(), e)))
                .collect()
        };
        let mut records = Vec::new();
        for line in read_lines("structures.jsonl")? {
            records.push(
                serde_json::from_str(&line)
                    .map_err(|e| Error::json(dir.join("structures.jsonl").display().to_string(), e))?,
            );
        }
        let mut failures = Vec::new();
        for line in read_lines("failures.jsonl")? {
            failures.push(
                serde_json::from_str(&line)
                    .map_err(|e| Error::json(dir.join("failures.jsonl").display().to_string(), e))?,
            );
        }
        Ok(EnsembleReport {
            config,
            config_digest,
            records,
            failures,
        })
    }
}

/// What a structure search is looking for.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SearchMode {
    /// A single high-transmission peak used at frequency degeneracy.
    DegeneratePeak,
    /// Two distinct peaks whose FWHM ratio is `ratio` within an absolute
    /// `tolerance`.
    TwoPeak { ratio: f64, tolerance: f64 },
}

/// Acceptance criteria for [`search_structures`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SearchCriteria {
    #[serde(flatten)]
    pub mode: SearchMode,
    /// Minimum peak transmittance. Values above 1 are legal and simply
    /// never match.
    pub min_t_max: f64,
    /// Minimum stack transmittance for the pump at normal incidence.
    pub pump_floor: f64,
}

impl SearchCriteria {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_t_max > 0.0) {
            return Err(Error::InvalidParameter("min_t_max must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.pump_floor) {
            return Err(Error::InvalidParameter(
                "pump_floor must be in [0, 1]".into(),
            ));
        }
        if let SearchMode::TwoPeak { ratio, tolerance } = self.mode {
            if !(ratio >= 1.0) || !(tolerance >= 0.0) {
                return Err(Error::InvalidParameter(
                    "two-peak mode needs ratio >= 1 and tolerance >= 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A structure matching the search criteria, with the peaks that matched:
/// one peak in degenerate mode, the (signal, idler) pair in two-peak mode.
#[derive(Debug, Clone)]
pub struct SearchMatch {
    pub index: u64,
    pub seed: u64,
    pub stack: LayerStack,
    pub peaks: Vec<Peak>,
}

/// Search result with the acceptance-rate bookkeeping.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub matches: Vec<SearchMatch>,
    pub examined: u64,
    /// matches / examined; 0 when the budget ran out with no match.
    pub acceptance_rate: f64,
}

fn match_criteria(
    stack: &LayerStack,
    peaks: &[Peak],
    criteria: &SearchCriteria,
) -> Result<Option<Vec<Peak>>> {
    let pump_ok = |omega_p: f64| -> Result<bool> {
        Ok(transmittance_at(stack, omega_p, 0.0)? >= criteria.pump_floor)
    };
    match criteria.mode {
        SearchMode::DegeneratePeak => {
            let mut best: Option<&Peak> = None;
            for p in peaks.iter().filter(|p| p.t_max >= criteria.min_t_max) {
                if pump_ok(2.0 * p.omega_c)? {
                    if best.map_or(true, |b| p.t_max > b.t_max) {
                        best = Some(p);
                    }
                }
            }
            Ok(best.map(|p| vec![p.clone()]))
        }
        SearchMode::TwoPeak { ratio, tolerance } => {
            let strong: Vec<&Peak> = peaks
                .iter()
                .filter(|p| p.t_max >= criteria.min_t_max)
                .collect();
            for (a, pa) in strong.iter().enumerate() {
                for pb in &strong[a + 1..] {
                    let r = (pa.fwhm_omega / pb.fwhm_omega).max(pb.fwhm_omega / pa.fwhm_omega);
                    if (r - ratio).abs() <= tolerance && pump_ok(pa.omega_c + pb.omega_c)? {
                        // Wider peak first: the convention is signal = wide.
                        let (wide, narrow) = if pa.fwhm_omega >= pb.fwhm_omega {
                            (pa, pb)
                        } else {
                            (pb, pa)
                        };
                        return Ok(Some(vec![(*wide).clone(), (*narrow).clone()]));
                    }
                }
            }
            Ok(None)
        }
    }
}

/// Stream up to `budget` generated structures through peak analysis and
/// return those matching `criteria`, stopping early once `max_matches`
/// are in hand. Uses the first n_elem and theta entries of `config`.
/// Per-structure numerical failures are skipped, never aborting the
/// search.
pub fn search_structures(
    config: &EnsembleConfig,
    criteria: &SearchCriteria,
    budget: u64,
    max_matches: usize,
) -> Result<SearchOutcome> {
    config.validate()?;
    criteria.validate()?;
    if max_matches == 0 {
        return Err(Error::InvalidParameter("max_matches must be >= 1".into()));
    }
    let n_elem = config.n_elem[0];
    let theta = config.theta_ext[0];
    let probe = |index: u64| -> Option<SearchMatch> {
        let seed = derive_seed(config.master_seed, index);
        let stack = generate_random_stack(&GeneratorParams {
            lambda0_um: config.lambda0_um,
            n_elem,
            jitter_sigma_um: config.jitter_sigma_um,
            seed,
        })
        .ok()?;
        let set =
            scan_transmission_peaks(&stack, config.band, theta, &ScanOptions::default()).ok()?;
        match match_criteria(&stack, &set.peaks, criteria) {
            Ok(Some(peaks)) => Some(SearchMatch {
                index,
                seed,
                stack,
                peaks,
            }),
            _ => None,
        }
    };

    const CHUNK: u64 = 64;
    let mut matches = Vec::new();
    let mut examined = 0;
    while examined < budget && matches.len() < max_matches {
        let end = (examined + CHUNK).min(budget);
        let mut found: Vec<SearchMatch> = (examined..end)
            .into_par_iter()
            .filter_map(probe)
            .collect();
        found.sort_by_key(|m| m.index);
        matches.extend(found);
        examined = end;
    }
    matches.truncate(max_matches);
    let acceptance_rate = matches.len() as f64 / examined as f64;
    Ok(SearchOutcome {
        matches,
        examined,
        acceptance_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> EnsembleConfig {
        let omega0 = omega_from_lambda_um(1.0);
        let mut c = EnsembleConfig::new(41, 6);
        c.n_elem = vec![40];
        c.theta_ext = vec![0.0, 0.4];
        c.band = (0.97 * omega0, 1.03 * omega0);
        c
    }

    #[test]
    fn derived_seeds_are_deterministic_and_distinct() {
        let a = derive_seed(7, 0);
        assert_eq!(a, derive_seed(7, 0));
        let seeds: std::collections::HashSet<u64> =
            (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(7, 3), derive_seed(8, 3));
    }

    #[test]
    fn single_structure_campaign_is_reproducible() {
        let mut c = small_config();
        c.count = 1;
        let a = run_campaign(&c).unwrap();
        let b = run_campaign(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 1);
        assert_eq!(a.records[0].seed, derive_seed(c.master_seed, 0));
    }

    #[test]
    fn report_is_independent_of_worker_count() {
        let base = run_campaign(&small_config()).unwrap();
        for workers in [1usize, 2, 8] {
            let mut c = small_config();
            c.workers = workers;
            let r = run_campaign(&c).unwrap();
            assert_eq!(
                serde_json::to_string(&r).unwrap(),
                serde_json::to_string(&base).unwrap(),
                "workers = {workers}"
            );
        }
    }

    #[test]
    fn sharded_run_merges_to_the_monolithic_report() {
        let c = small_config();
        let whole = run_campaign(&c).unwrap();
        let shards: Vec<EnsembleReport> = (0..4)
            .map(|s| run_campaign_shard(&c, s, 4).unwrap())
            .collect();
        let mut merged = EnsembleReport::empty(&c);
        for s in &shards {
            merged = merge_reports(&merged, s).unwrap();
        }
        assert_eq!(
            serde_json::to_string(&merged).unwrap(),
            serde_json::to_string(&whole).unwrap()
        );
        assert_eq!(
            serde_json::to_string(&merged.summaries()).unwrap(),
            serde_json::to_string(&whole.summaries()).unwrap()
        );
    }

    #[test]
    fn merge_is_commutative_with_identity() {
        let c = small_config();
        let a = run_campaign_shard(&c, 0, 2).unwrap();
        let b = run_campaign_shard(&c, 1, 2).unwrap();
        let ab = merge_reports(&a, &b).unwrap();
        let ba = merge_reports(&b, &a).unwrap();
        assert_eq!(ab, ba);
        let with_empty = merge_reports(&a, &EnsembleReport::empty(&c)).unwrap();
        assert_eq!(with_empty, a);
    }

    #[test]
    fn incompatible_binning_is_rejected() {
        let c = small_config();
        let a = run_campaign_shard(&c, 0, 2).unwrap();
        let mut c2 = c.clone();
        c2.bin_edges_nm = vec![0.01, 0.1, 1.0];
        let b = EnsembleReport::empty(&c2);
        assert!(matches!(
            merge_reports(&a, &b),
            Err(Error::IncompatibleReports(_))
        ));
        // Overlapping shards are rejected too.
        assert!(merge_reports(&a, &a).is_err());
    }

    #[test]
    fn histogram_normalizes_and_conserves_peaks() {
        let report = run_campaign(&small_config()).unwrap();
        for cell in report.summaries() {
            let total: f64 = cell.probability.iter().sum();
            if cell.peak_count > cell.out_of_range {
                assert!((total - 1.0).abs() < 1e-9, "sum = {total}");
            }
            let binned: u64 = cell.bin_counts.iter().sum();
            assert_eq!(cell.peak_count, binned + cell.out_of_range);
            assert!(cell.peak_count > 0, "expected peaks in the probe band");
        }
    }

    #[test]
    fn save_and_load_round_trip() {
        let report = run_campaign(&small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        report.save(dir.path()).unwrap();
        let loaded = EnsembleReport::load(dir.path()).unwrap();
        assert_eq!(report, loaded);
    }

    #[test]
    fn impossible_criteria_give_an_empty_result() {
        let criteria = SearchCriteria {
            mode: SearchMode::DegeneratePeak,
            min_t_max: 1.01,
            pump_floor: 0.0,
        };
        let out = search_structures(&small_config(), &criteria, 16, 1).unwrap();
        assert!(out.matches.is_empty());
        assert_eq!(out.examined, 16);
        assert_eq!(out.acceptance_rate, 0.0);
    }

    #[test]
    fn degenerate_search_finds_a_transparent_peak() {
        let criteria = SearchCriteria {
            mode: SearchMode::DegeneratePeak,
            min_t_max: 0.5,
            pump_floor: 0.0,
        };
        let out = search_structures(&small_config(), &criteria, 200, 1).unwrap();
        assert!(!out.matches.is_empty(), "no match in {} tries", out.examined);
        let m = &out.matches[0];
        assert_eq!(m.peaks.len(), 1);
        assert!(m.peaks[0].t_max >= 0.5);
        assert!(out.acceptance_rate > 0.0);
    }

    #[test]
    fn invalid_criteria_and_configs_are_rejected() {
        let mut c = small_config();
        c.bin_edges_nm = vec![1.0, 0.5];
        assert!(c.validate().is_err());
        let crit = SearchCriteria {
            mode: SearchMode::TwoPeak {
                ratio: 0.5,
                tolerance: 0.1,
            },
            min_t_max: 0.9,
            pump_floor: 0.1,
        };
        assert!(crit.validate().is_err());
    }
}
