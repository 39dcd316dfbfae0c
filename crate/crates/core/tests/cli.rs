use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use twoway_denoise::io::read_matrix_file;

fn twoway(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twoway")).args(args).output().expect("spawn twoway")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn read_json(p: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn write_spec(dir: &Path) -> String {
    let spec = path(dir, "spec.json");
    std::fs::write(
        &spec,
        r#"{"m": 120, "n": 80, "k": 12, "l": 10, "r": 2, "singular_values": [90, 70], "sigma": 1.0}"#,
    )
    .unwrap();
    spec
}

#[test]
fn simulate_then_denoise_then_rank() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (x, truth, mhat, report) = (path(d, "x.csv"), path(d, "m.csv"), path(d, "mhat.csv"), path(d, "report.json"));

    let out = twoway(&["simulate", "--spec", &write_spec(d), "--seed", "7", "--out", &x, "--truth", &truth]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_matrix_file(Path::new(&x)).unwrap().shape(), (120, 80));

    let out = twoway(&["denoise", "--input", &x, "--output", &mhat, "--report", &report, "--beta", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let est = read_matrix_file(Path::new(&mhat)).unwrap();
    let m = read_matrix_file(Path::new(&truth)).unwrap();
    let raw = read_matrix_file(Path::new(&x)).unwrap();
    assert!((&est - &m).norm() < 0.5 * (&raw - &m).norm());

    let rep = read_json(&report);
    assert_eq!(rep["r_hat"], 2);
    assert!(rep["sigma_hat"].as_f64().unwrap() > 0.8);
    assert!(rep["t_hat"].as_u64().unwrap() >= 1);
    let steps = rep["iterations_run"].as_u64().unwrap() as usize;
    assert_eq!(rep["trace"].as_array().unwrap().len(), steps);
    assert!(!rep["row_support"].as_array().unwrap().is_empty());

    let out = twoway(&["rank", "--input", &x]);
    assert!(out.status.success());
    let rank: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rank["r_hat"], 2);
    assert!(rank["screened_rows"].as_u64().unwrap() > 0);
    assert!(rank["delta"].as_f64().unwrap() > 0.0);
}

#[test]
fn explicit_rank_sigma_and_rule() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (x, mhat, report) = (path(d, "x.csv"), path(d, "mhat.csv"), path(d, "r.json"));
    assert!(twoway(&["simulate", "--spec", &write_spec(d), "--out", &x]).status.success());
    let out = twoway(&[
        "denoise", "--input", &x, "--output", &mhat, "--report", &report, "--rank", "1", "--sigma", "1", "--threshold",
        "scad", "--scad-a", "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = read_json(&report);
    assert_eq!(rep["rank"], 1);
    assert_eq!(rep["sigma"], 1.0);
    assert!(rep["sigma_hat"].is_null());
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let ragged = path(dir.path(), "bad.csv");
    std::fs::write(&ragged, "1,2,3\n4,5\n").unwrap();
    let out = twoway(&["denoise", "--input", &ragged, "--output", &path(dir.path(), "o.csv")]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = twoway(&["denoise", "--input", &ragged, "--output", "o.csv", "--rank", "many"]);
    assert!(!out.status.success());
}

#[test]
fn desk_bench_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = path(dir.path(), "t2.json");
    let out = twoway(&["bench", "table2", "--scale", "desk", "--reps", "2", "--seed", "3", "--out", &json]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let reports = read_json(&json);
    assert_eq!(reports.as_array().unwrap().len(), 4);
    assert_eq!(reports[0]["reps"], 2);
    let csv = std::fs::read_to_string(dir.path().join("t2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("label,"));
}
