//! End-to-end tests of the command-line interface: output formats, exit
//! codes, determinism across processes and the worker-count environment
//! knob.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_herding-tax"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

/// Hand-checkable two-step experiment: unit drift, unit-lag kernel, grid
/// straddling the reachable gaps.
const TWO_STEP: &str = r#"{
    "model": {"alpha_up": 1.0, "alpha_down": -1.0, "sigma": 1.0, "kernel": [[1.0, 1.0]]},
    "tax": {"rho_grid": [0.0, 0.5, 2.0], "holding_time": 1.0},
    "run": {"n": 2}
}"#;

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "command failed: {}\n{}",
        output.status,
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn enumerate_prints_the_worked_table_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TWO_STEP);
    let output = bin()
        .args(["enumerate", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    let csv = stdout_of(&output);
    assert_eq!(
        csv,
        "upsilon,rho,n,paths,method,scaling,estimate,stderr,seed\n\
         0,0,2,4,log-indicator,standard,0.5,,\n\
         0.5,0.5,2,4,log-indicator,standard,0.25,,\n\
         2,2,2,4,log-indicator,standard,0,,\n"
    );
}

#[test]
fn exact_rows_leave_sampling_columns_empty_and_mc_rows_fill_them() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TWO_STEP);
    let exact = stdout_of(
        &bin()
            .args(["enumerate", "--config"])
            .arg(&config)
            .output()
            .unwrap(),
    );
    for row in exact.lines().skip(1) {
        assert!(
            row.ends_with(",,"),
            "exact row should have empty stderr and seed: {row}"
        );
    }

    let sampled = stdout_of(
        &bin()
            .args(["mc", "--config"])
            .arg(&config)
            .args(["--paths", "500", "--seed", "9"])
            .output()
            .unwrap(),
    );
    for row in sampled.lines().skip(1) {
        assert!(
            row.ends_with(",9"),
            "sampled row should carry the seed: {row}"
        );
        let stderr_field = row.split(',').nth(7).unwrap();
        assert!(
            !stderr_field.is_empty(),
            "sampled row should carry a standard error: {row}"
        );
    }
}

#[test]
fn mc_runs_are_reproducible_across_processes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TWO_STEP);
    let run = || {
        stdout_of(
            &bin()
                .args(["mc", "--config"])
                .arg(&config)
                .args(["--n", "40", "--paths", "2000", "--seed", "77"])
                .output()
                .unwrap(),
        )
    };
    assert_eq!(run(), run(), "same seed, same bytes");
}

#[test]
fn the_worker_knob_cannot_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TWO_STEP);
    let run_with = |workers: &str, via_env: bool| {
        let mut cmd = bin();
        cmd.args(["mc", "--config"])
            .arg(&config)
            .args(["--n", "64", "--paths", "1000", "--seed", "3"]);
        if via_env {
            cmd.env("HERDING_TAX_WORKERS", workers);
        } else {
            cmd.args(["--workers", workers]);
        }
        stdout_of(&cmd.output().unwrap())
    };
    let reference = run_with("1", false);
    assert_eq!(reference, run_with("4", false));
    assert_eq!(reference, run_with("16", false));
    assert_eq!(reference, run_with("2", true));
}

#[test]
fn a_malformed_worker_environment_value_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TWO_STEP);
    let output = bin()
        .args(["mc", "--config"])
        .arg(&config)
        .env("HERDING_TAX_WORKERS", "lots")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let message = String::from_utf8_lossy(&output.stderr);
    assert!(
        message.contains("HERDING_TAX_WORKERS"),
        "diagnostic names the variable: {message}"
    );
}

#[test]
fn json_reports_carry_the_sweep_and_its_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TWO_STEP);
    let out = dir.path().join("report.json");
    let output = bin()
        .args(["mc", "--config"])
        .arg(&config)
        .args(["--paths", "400", "--seed", "5", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["monotone"], serde_json::json!(true));
    assert_eq!(report["argmin"]["upsilon"], serde_json::json!(2.0));
    assert_eq!(report["argmin"]["rho"], serde_json::json!(2.0));
    assert_eq!(report["sweep"]["n"], serde_json::json!(2));
    assert_eq!(report["sweep"]["path_count"], serde_json::json!(400));
    assert_eq!(report["sweep"]["master_seed"], serde_json::json!(5));
    assert_eq!(report["sweep"]["coupled"], serde_json::json!(true));
    assert_eq!(report["sweep"]["estimates"].as_array().unwrap().len(), 3);
    assert!(report["unix_time"].as_u64().unwrap() > 0);
}

#[test]
fn threshold_grids_bypass_the_tax_block() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TWO_STEP);
    let output = bin()
        .args(["enumerate", "--config"])
        .arg(&config)
        .args(["--upsilon-grid", "0,0.5,2"])
        .output()
        .unwrap();
    let csv = stdout_of(&output);
    // Same thresholds as the worked table, now given directly.
    assert!(csv.contains("0.5,0.5,2,4,log-indicator,standard,0.25,,"));
}

#[test]
fn rate_and_threshold_grids_conflict() {
    let output = bin()
        .args(["mc", "--rho-grid", "0:1:4", "--upsilon-grid", "0:1:4"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_flags_exit_with_a_usage_error() {
    let output = bin().args(["enumerate", "--frobnicate"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn malformed_configs_exit_with_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"model": {"alpha_up": 1.0, "alpha_down": 1.0, "sigma": 1.0, "kernel": [[1.0, 1.0]]}}"#,
    );
    let output = bin()
        .args(["enumerate", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let message = String::from_utf8_lossy(&output.stderr);
    assert!(
        message.contains("downward drift"),
        "diagnostic names the offending parameter: {message}"
    );
}

#[test]
fn oversized_meshes_are_refused_with_advice() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TWO_STEP);
    let output = bin()
        .args(["enumerate", "--config"])
        .arg(&config)
        .args(["--n", "50"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let message = String::from_utf8_lossy(&output.stderr);
    assert!(
        message.contains("Monte Carlo"),
        "diagnostic suggests the alternative: {message}"
    );
}

#[test]
fn unwritable_outputs_exit_with_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TWO_STEP);
    let out = dir.path().join("missing").join("out.csv");
    let output = bin()
        .args(["enumerate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn verification_passes_and_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let output = bin()
        .args(["verify", "quick", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(
        text.contains("all suites passed"),
        "stdout summarizes: {text}"
    );

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["level"], serde_json::json!("quick"));
    assert_eq!(report["passed"], serde_json::json!(true));
    assert_eq!(report["suites"].as_array().unwrap().len(), 5);
}

#[test]
fn unknown_verification_levels_are_refused() {
    let output = bin().args(["verify", "paranoid"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn bare_mc_runs_the_reference_experiment() {
    // No config, no flags: the built-in defaults must produce a full sweep.
    let output = bin()
        .args(["mc", "--paths", "200", "--n", "16"])
        .output()
        .unwrap();
    let csv = stdout_of(&output);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(
        rows[0],
        "upsilon,rho,n,paths,method,scaling,estimate,stderr,seed"
    );
    assert_eq!(rows.len(), 1 + 16, "default rate grid has sixteen points");
}
