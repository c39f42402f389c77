use std::path::Path;
use std::process::{Command, Output};

fn modctx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modctx")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_algebra_writes_compatibility_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let out = modctx(&["verify-algebra", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("compatibility.csv"));
    for ctx in ["ABC", "abc", "αβγ", "Aaα", "Bbβ", "Ccγ"] {
        assert_eq!(rows.iter().filter(|r| &r[0] == ctx).count(), 36, "{ctx}");
    }
    let report = json(&dir.path().join("verify_algebra.json"));
    assert_eq!(report["all_certified"], true);
}

#[test]
fn perturbed_algebra_fails_verification() {
    let out = modctx(&["verify-algebra", "--perturb"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("ABC"));
}

#[test]
fn configuration_errors_exit_with_two() {
    assert_eq!(code(&modctx(&["violate", "--grid-M", "4", "--grid-K", "8", "--grid-N", "63"])), 2);
    assert_eq!(code(&modctx(&["violate", "--state", "{\"family\":\"nope\"}"])), 2);
    assert_eq!(code(&modctx(&["sample", "--shots", "0"])), 2);
    assert_eq!(code(&modctx(&["eigenbasis", "--kappa-index", "1", "--v2-index", "0"])), 2);
    assert_eq!(code(&modctx(&["violate", "--hbar", "zero"])), 2);
    assert_eq!(code(&modctx(&["violate", "--config", "/nonexistent/config.json"])), 2);
}

#[test]
fn violate_sweep_reports_eight_states() {
    let dir = tempfile::tempdir().unwrap();
    let out = modctx(&["violate", "--sweep", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let rows = read_csv(&dir.path().join("violate.csv"));
    assert_eq!(rows.len(), 8);
    for r in &rows {
        let s: f64 = r[13].parse().unwrap();
        assert!((s - 6.0).abs() < 1e-9);
    }
    let report = json(&dir.path().join("violate.json"));
    let mixed = report["states"].as_array().unwrap().iter().filter(|s| s["mixed"] == true).count();
    assert_eq!(mixed, 2);
}

#[test]
fn single_shot_gives_six_log_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = modctx(&["sample", "--shots", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(read_csv(&dir.path().join("shots.csv")).len(), 6);
}

#[test]
fn same_seed_gives_identical_logs() {
    let args = ["sample", "--shots", "50", "--seed", "7", "--format", "csv"];
    let a = modctx(&args);
    let b = modctx(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = modctx(&["sample", "--shots", "50", "--seed", "8", "--format", "csv"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{"shots": 3, "seed": 1, "grid": {"M": 2, "K": 3}}"#).unwrap();
    let path = config.to_str().unwrap();
    let from_file = modctx(&["sample", "--config", path]);
    assert_eq!(code(&from_file), 0);
    let report: serde_json::Value = serde_json::from_slice(&from_file.stdout).unwrap();
    assert_eq!(report["shots"], 3);
    assert_eq!(report["grid"]["N"], 12);
    let flagged = modctx(&["sample", "--config", path, "--shots", "4"]);
    let report: serde_json::Value = serde_json::from_slice(&flagged.stdout).unwrap();
    assert_eq!(report["shots"], 4);
    assert_eq!(report["seed"], 1);
}

#[test]
fn eigenbasis_default_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = modctx(&["eigenbasis", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("eigenbasis.csv"));
    assert!(rows.iter().all(|r| &r[2] == "true"));
}

#[test]
fn bound_reports_three_root_three() {
    let out = modctx(&["bound", "--samples", "20000", "--step", "0.05"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let max = report["max"].as_f64().unwrap();
    assert!((max - 3.0 * 3f64.sqrt()).abs() < 1e-6);
}
