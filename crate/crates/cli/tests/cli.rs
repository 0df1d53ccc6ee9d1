//! End-to-end checks of the binary: determinism of outputs, exit-code
//! contract, and the machine-readable result schema.

use std::fs;
use std::process::{Command, Output};

use tempfile::tempdir;

fn dpskit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpskit"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn keyrate_curve_outputs_are_byte_identical() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = dpskit(&[
            "keyrate-curve",
            "--eta-points",
            "4",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let bytes_a = fs::read(&a).unwrap();
    assert_eq!(bytes_a, fs::read(&b).unwrap());
    let text = String::from_utf8(bytes_a).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("eta,mu_star[0]"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn keyrate_curve_json_has_schema() {
    let out = dpskit(&["keyrate-curve", "--eta-points", "3", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["version"].is_string());
    assert_eq!(doc["results"]["rows"].as_array().unwrap().len(), 3);
    assert_eq!(doc["params"]["e_bit"], 0.01);
}

#[test]
fn verify_passes_by_default() {
    let out = dpskit(&["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["results"]["pass"], true);
    let suites = doc["results"]["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 5);
    for suite in suites {
        assert_eq!(suite["pass"], true, "suite {:?}", suite["name"]);
    }
}

#[test]
fn verify_detects_a_broken_inequality() {
    // Halving the amplification coefficient must drive the weight-1 suite
    // negative; this guards the harness itself.
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"verify": {"lemma1_lambda_scale": 0.5, "mono_points": 11, "mb_grid": 5}}"#,
    )
    .unwrap();
    let out = dpskit(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let suites = doc["results"]["suites"].as_array().unwrap();
    let lemma1 = suites.iter().find(|s| s["name"] == "lemma1-psd").unwrap();
    assert_eq!(lemma1["pass"], false);
    assert!(lemma1["witness"].as_f64().unwrap() < 0.0);
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = dpskit(&["verify", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"simulate": {"unknown_field": 3}}"#).unwrap();
    let out = dpskit(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_rejects_zero_blocks() {
    let out = dpskit(&["simulate", "--n-em", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fock_check_rejects_large_cutoff() {
    let out = dpskit(&["fock-check", "--n-max", "7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fock_check_passes_and_reports_metrics() {
    let out = dpskit(&["fock-check", "--seed", "3"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["results"]["commutation_max_trace_distance"].as_f64().unwrap() <= 1e-10);
    assert!(doc["results"]["povm_max_entry_error"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn simulate_records_seed_and_reproduces() {
    let args = ["simulate", "--n-em", "50000", "--seed", "11"];
    let out1 = dpskit(&args);
    let out2 = dpskit(&args);
    assert!(out1.status.success());
    assert_eq!(out1.stdout, out2.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&out1.stdout).unwrap();
    assert_eq!(doc["params"]["seed"], 11);
    let tallies = &doc["results"]["tallies"];
    assert_eq!(
        tallies["n_code"].as_u64().unwrap() + tallies["n_sample"].as_u64().unwrap(),
        tallies["n_det"].as_u64().unwrap()
    );
    assert!(doc["results"]["key_length"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_csv_quotes_detail_fields() {
    let out = dpskit(&["verify", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "suite,pass,witness,threshold,detail");
    for line in lines {
        assert!(line.ends_with('"'), "unquoted detail in {line}");
        assert_eq!(line.split(',').count(), line.matches(',').count() + 1);
    }
}

#[test]
fn simulate_is_independent_of_thread_count() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_dpskit"))
            .args(["simulate", "--n-em", "80000", "--seed", "9"])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .expect("binary runs")
    };
    let single = run("1");
    let multi = run("4");
    assert!(single.status.success());
    assert_eq!(single.stdout, multi.stdout);
}

#[test]
fn simulate_threshold_reports_tag_diagnostics() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"simulate": {"n_em": 50000, "mu": 0.3, "backend": "threshold",
             "bs": {"eta3": 0.5, "eta4": 0.5, "delta3": 0.01, "delta4": 0.01}}}"#,
    )
    .unwrap();
    let out = dpskit(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let hidden = &doc["results"]["hidden"];
    let n_tag = hidden["n_tag"].as_u64().unwrap() as f64;
    let bound = hidden["tag_bound"].as_f64().unwrap();
    assert!(n_tag <= bound + 4.0 * (50_000f64).sqrt());
}
