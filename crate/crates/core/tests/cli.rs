use std::path::Path;
use std::process::{Command, Output};

use qlandscape::harness::RUN_CSV_HEADER;
use serde_json::Value;

fn qlandscape(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlandscape")).args(args).output().expect("binary runs")
}

fn error_json(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("stderr has an error line");
    serde_json::from_str(line).expect("stderr is JSON")
}

const SMALL: [&str; 12] =
    ["--ansatz", "cz", "--layers", "1", "--qubits", "2", "--reps", "2", "--radii", "0.5:2:3", "--seed", "7"];

fn small_sweep(sub: &str, out: &Path) -> Output {
    let mut args = vec![sub];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    qlandscape(&args)
}

#[test]
fn distance_csv_has_header_and_one_row_per_radius() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.csv");
    let out = small_sweep("distance", &path);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), RUN_CSV_HEADER.join(","));
    // 2 reps × 2 samples × 3 radii
    assert_eq!(lines.count(), 12);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(small_sweep("improvement", &a).status.success());
    assert!(small_sweep("improvement", &b).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn json_output_parses() {
    let mut args = vec!["distance"];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(&["--format", "json"]);
    let out = qlandscape(&args);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let runs = v.as_array().unwrap();
    assert_eq!(runs.len(), 4);
    assert_eq!(runs[0]["ansatz"], "cz_entanglement");
}

#[test]
fn landscape_csv_to_stdout() {
    let out = qlandscape(&["landscape", "--resolution", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // header plus 5 × 5 points for each of the two samples
    assert_eq!(text.lines().count(), 1 + 2 * 25);
}

#[test]
fn verify_bounds_reports_passing_checks() {
    let out = qlandscape(&["verify-bounds", "--dims", "2", "--trials", "3", "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn expressivity_json_has_one_record_per_spec() {
    let out = qlandscape(&[
        "expressivity", "--ansatz", "no_entanglement,cz", "--layers", "1,2", "--qubits", "2", "--format", "json",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
}

#[test]
fn usage_errors_exit_two_with_json() {
    let out = qlandscape(&["distance", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["kind"], "usage");
}

#[test]
fn bad_radii_are_reported() {
    let out = qlandscape(&["distance", "--radii", "1:2"]);
    assert_eq!(out.status.code(), Some(1));
    let e = error_json(&out);
    assert!(e["error"]["message"].as_str().unwrap().contains("radii"));
}

#[test]
fn config_with_unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(
        &path,
        r#"{"experiment":"distance","ansatz":[{"family":"cz_entanglement","layers":[1]}],
            "qubits":2,"repetitions":1,"master_seed":0,"colour":"blue"}"#,
    )
    .unwrap();
    let out = qlandscape(&["distance", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(error_json(&out)["error"]["message"].as_str().unwrap().contains("colour"));
}

#[test]
fn config_for_another_experiment_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(
        &path,
        r#"{"experiment":"improvement","ansatz":[{"family":"cz_entanglement","layers":[1]}],
            "qubits":2,"repetitions":1,"master_seed":0,"radii":[0.5,1.0]}"#,
    )
    .unwrap();
    let out = qlandscape(&["distance", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}
