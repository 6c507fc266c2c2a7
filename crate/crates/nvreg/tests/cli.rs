// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nvreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nvreg")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_owned()
}

#[test]
fn unknown_experiment_exits_one_with_error_json() {
    let out = nvreg(&["--experiment", "teleport"]);
    assert_eq!(out.status.code(), Some(1));
    let body = stdout_json(&out);
    assert_eq!(body["error"], "unknown_experiment");
    assert_eq!(body["unknown_experiment"], "teleport");
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"experiment": "qec-sweep", "params": {"p_grid": []}}"#).unwrap();
    let out = nvreg(&["--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["error"], "invalid_config");

    fs::write(&cfg, "{not json").unwrap();
    let out = nvreg(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["error"], "invalid_config");

    let out = nvreg(&["--experiment", "ghz", "--jobs", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn headers_match_documented_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("qec-sweep", "qec.csv", "p,variant,mode,fidelity,stderr"),
        ("readout-surface", "surface.csv", "reps,shift,fidelity,success_prob"),
        ("readout-surface", "trace.csv", "step,count,true_state"),
        ("hyperfine-spectrum", "hyperfine_spectrum.csv", "frequency_hz,density"),
        ("spectrum", "lines.csv", "n,c1,c2,offset_hz"),
    ];
    for (exp, file, expected) in cases {
        let out_dir = dir.path().join(exp);
        let out = nvreg(&["--experiment", exp, "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{exp}: {}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(header(&out_dir.join(file)), expected, "{exp}/{file}");
        let manifest: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["experiment"], exp);
        assert!(manifest["wall_time_s"].is_f64());
    }
}

#[test]
fn qec_sweep_matches_analytic_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = nvreg(&["--experiment", "qec-sweep", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let mut r = csv::Reader::from_path(dir.path().join("qec.csv")).unwrap();
    let mut seen = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        if &rec[1] == "corrected-q1q2q3" {
            let p: f64 = rec[0].parse().unwrap();
            let f: f64 = rec[3].parse().unwrap();
            assert!((f - (1.0 - 3.0 * p * p + 2.0 * p * p * p)).abs() < 1e-9);
            seen += 1;
        }
    }
    assert_eq!(seen, 21);
}

#[test]
fn mermin_on_ideal_ghz_is_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = nvreg(&["--experiment", "mermin", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("mermin.json")).unwrap()).unwrap();
    assert!((doc["value"].as_f64().unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"experiment": "ghz", "seed": 5, "output_path": "/nonexistent/never"}"#).unwrap();
    let out_dir = dir.path().join("o");
    let out = nvreg(&["--config", cfg.to_str().unwrap(), "--seed", "9", "--experiment", "w", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let m = stdout_json(&out);
    assert_eq!((m["experiment"].as_str(), m["seed"].as_u64()), (Some("w"), Some(9)));
    assert!(out_dir.join("w.json").exists());
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"experiment": "qec-sweep", "params": {"mode": "monte-carlo", "trials": 500, "p_grid": [0.1, 0.3]}}"#).unwrap();
    let run = |jobs: &str, name: &str| -> Vec<u8> {
        let o = dir.path().join(name);
        let out = nvreg(&["--config", cfg.to_str().unwrap(), "--jobs", jobs, "--seed", "4", "--out", o.to_str().unwrap()]);
        assert!(out.status.success());
        fs::read(o.join("qec.csv")).unwrap()
    };
    assert_eq!(run("1", "a"), run("3", "b"));
}

#[test]
fn register_file_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"experiment": "spectrum", "register": {"nitrogen_mode": "full-triplet"}}"#).unwrap();
    let out = nvreg(&["--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["summary"]["distinct_lines"], 12);
}
