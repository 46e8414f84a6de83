use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn onofri_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onofri-lab")).args(args).output().unwrap()
}

fn report(dir: &Path, command: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{command}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn json_report_follows_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = onofri_lab(&["verify-measure", "--n", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json = report(dir.path(), "verify-measure");
    assert_eq!(json["command"], "verify-measure");
    assert!(json["config"].is_object());
    assert!(json["wall_ms"].is_number());
    assert_eq!(json["pass"], true);
    let cases = json["cases"].as_array().unwrap();
    assert!(!cases.is_empty());
    for case in cases {
        for key in ["params", "values", "residual", "pass"] {
            assert!(case.get(key).is_some(), "missing {key}");
        }
    }
    assert!(dir.path().join("verify-measure.csv").exists());
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# sweep\nn = 2\nr_list = 3,10\nabs_tol=1e-11\n").unwrap();
    let out = onofri_lab(&[
        "minimize-cc",
        "--n",
        "3",
        "--r-list",
        "10,30,100,300",
        "--descent-steps",
        "0",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let json = report(dir.path(), "minimize-cc");
    assert_eq!(json["config"]["n"], 2);
    assert_eq!(json["config"]["r_list"], serde_json::json!([3.0, 10.0]));
    assert_eq!(json["config"]["quadrature"]["abs_tol"], 1e-11);
    assert_eq!(json["config"]["descent_steps"], 0);
}

#[test]
fn failing_report_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = onofri_lab(&["counterexample", "--big-k-list", "100,1000", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(dir.path(), "counterexample")["pass"], false);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(onofri_lab(&["verify-measure", "--n", "1"]).status.code(), Some(2));
    assert_eq!(onofri_lab(&["counterexample", "--n", "2"]).status.code(), Some(2));
    assert_eq!(onofri_lab(&["verify-measure", "--abs-tol", "-1"]).status.code(), Some(2));
    assert!(!onofri_lab(&["no-such-command"]).status.success());
}

#[test]
fn sweep_csv_has_one_row_per_case() {
    let dir = tempfile::tempdir().unwrap();
    let out = onofri_lab(&["equivalence-sandwich", "--r-list", "10,100,1000", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let json = report(dir.path(), "equivalence-sandwich");
    let mut rdr = csv::Reader::from_path(dir.path().join("equivalence-sandwich.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "pass"));
    assert_eq!(rdr.records().count(), json["cases"].as_array().unwrap().len());
}

#[test]
fn identities_writes_the_exact_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = onofri_lab(&["identities", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let table = std::fs::read_to_string(dir.path().join("identities_table.csv")).unwrap();
    assert!(table.starts_with("kind,n,k,numerator,denominator,claimed,match"));
    assert_eq!(table.lines().count(), 1 + 190 + 19);
}

#[test]
fn same_seed_same_numbers() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = onofri_lab(&["verify-onofri", "--n", "2", "--samples", "25", "--seed", "9", "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success());
    }
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("wall_ms");
        v
    };
    assert_eq!(strip(report(a.path(), "verify-onofri")), strip(report(b.path(), "verify-onofri")));
}
