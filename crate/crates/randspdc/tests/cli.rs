//! End-to-end checks of the command-line binary: determinism of the
//! artifacts, output formats, and the exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

use randspdc::ensemble::{EnsembleConfig, SearchCriteria, SearchMode};
use randspdc::omega_from_lambda_um;
use randspdc::stack::LayerStack;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randspdc"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|_| panic!("{name} exists in {dir:?}"))
}

fn small_ensemble_config() -> EnsembleConfig {
    let mut config = EnsembleConfig::new(5, 4);
    config.n_elem = vec![40];
    config.theta_ext = vec![0.0];
    config
}

#[test]
fn generate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = run(dir, &["--seed", "7", "generate", "--n-elem", "120"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.contains("optical_length_um"), "stdout: {stdout}");
    }
    assert_eq!(read(&a, "structure.json"), read(&b, "structure.json"));
}

#[test]
fn zero_jitter_hits_the_design_optical_length() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        tmp.path(),
        &["--seed", "3", "generate", "--n-elem", "250", "--jitter", "0"],
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(tmp.path().join("structure.json")).unwrap();
    let stack = LayerStack::from_json(&text).unwrap();
    let length = stack
        .optical_length_um(omega_from_lambda_um(1.0))
        .unwrap();
    assert!(
        (length - 62.5).abs() < 1e-9,
        "250 quarter-wave slots must give 62.5 um, got {length}"
    );
}

#[test]
fn spectrum_and_peaks_write_stable_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert!(run(dir, &["--seed", "7", "generate", "--n-elem", "60"]).status.success());
    let structure = dir.join("structure.json");
    let structure = structure.to_str().unwrap();

    let first = run(dir, &["spectrum", "--structure", structure, "--points", "801"]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let csv = read(dir, "spectrum.csv");
    assert!(csv.starts_with(b"omega_rad_per_fs,T,R,re_t,im_t"));

    // Re-running produces byte-identical artifacts.
    let again = run(dir, &["spectrum", "--structure", structure, "--points", "801"]);
    assert!(again.status.success());
    assert_eq!(csv, read(dir, "spectrum.csv"));

    let peaks = run(dir, &["peaks", "--structure", structure]);
    assert!(peaks.status.success(), "{}", String::from_utf8_lossy(&peaks.stderr));
    let peaks_csv = String::from_utf8(read(dir, "peaks.csv")).unwrap();
    assert!(peaks_csv.starts_with("omega_c_rad_per_fs"), "{peaks_csv}");
}

#[test]
fn missing_structure_file_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["spectrum", "--structure", "/nonexistent/s.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.json");
    std::fs::write(&config, b"{ not json").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_randspdc"))
        .args(["--config", config.to_str().unwrap(), "generate"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_without_a_search_section_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("config.json");
    let body = serde_json::json!({ "ensemble": small_ensemble_config() });
    std::fs::write(&config, serde_json::to_vec_pretty(&body).unwrap()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_randspdc"))
        .args(["--config", config.to_str().unwrap(), "search"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sharded_ensemble_runs_merge_to_the_monolithic_campaign() {
    let tmp = tempfile::tempdir().unwrap();
    let config_path = tmp.path().join("config.json");
    let body = serde_json::json!({ "ensemble": small_ensemble_config() });
    std::fs::write(&config_path, serde_json::to_vec_pretty(&body).unwrap()).unwrap();
    let config = config_path.to_str().unwrap();

    let whole = tmp.path().join("whole");
    let out = Command::new(env!("CARGO_BIN_EXE_randspdc"))
        .args(["--config", config, "--out"])
        .arg(&whole)
        .arg("ensemble")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut shard_dirs = Vec::new();
    for shard in 0..2u64 {
        let dir = tmp.path().join(format!("shard{shard}"));
        let out = Command::new(env!("CARGO_BIN_EXE_randspdc"))
            .args(["--config", config, "--out"])
            .arg(&dir)
            .args(["ensemble", "--shard", &shard.to_string(), "--of", "2"])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        shard_dirs.push(dir.join("campaign"));
    }

    let merged = tmp.path().join("merged");
    let out = Command::new(env!("CARGO_BIN_EXE_randspdc"))
        .arg("--out")
        .arg(&merged)
        .arg("ensemble")
        .arg("--merge")
        .args(&shard_dirs)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    for name in ["structures.jsonl", "aggregate.json"] {
        assert_eq!(
            read(&whole.join("campaign"), name),
            read(&merged.join("campaign"), name),
            "{name} differs between monolithic and merged runs"
        );
    }
}

#[test]
fn search_writes_matches_and_structures() {
    let tmp = tempfile::tempdir().unwrap();
    let config_path = tmp.path().join("config.json");
    let body = serde_json::json!({
        "ensemble": small_ensemble_config(),
        "search": SearchCriteria {
            mode: SearchMode::DegeneratePeak,
            min_t_max: 0.4,
            pump_floor: 0.0,
        },
    });
    std::fs::write(&config_path, serde_json::to_vec_pretty(&body).unwrap()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_randspdc"))
        .args(["--config", config_path.to_str().unwrap(), "--out"])
        .arg(tmp.path())
        .args(["search", "--budget", "200", "--max-matches", "1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let matches: serde_json::Value =
        serde_json::from_slice(&read(tmp.path(), "matches.json")).unwrap();
    assert!(matches["examined"].as_u64().unwrap() >= 1);
    if let Some(first) = matches["matches"].as_array().unwrap().first() {
        let name = first["structure_file"].as_str().unwrap();
        let text = std::fs::read_to_string(tmp.path().join(name)).unwrap();
        LayerStack::from_json(&text).unwrap();
    }
}
