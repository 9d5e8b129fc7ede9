use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use upperset::corpus::{builtin, fixture_to_json};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_upperset")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("upperset-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn status(r: &Value, concept: &str) -> String {
    r["points"][0]["matrix"]["verdicts"][concept]["status"].as_str().unwrap().to_string()
}

#[test]
fn check_switch_on_at_zero() {
    let out = run(&["check", "--builtin", "switch-on", "--at", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(status(&r, "uc"), "holds");
    assert_eq!(status(&r, "eff"), "fails");
    assert_eq!(r["ok"], Value::Bool(true));
}

#[test]
fn check_sliding_ray_at_zero() {
    let out = run(&["check", "--builtin", "sliding-ray", "--at", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(status(&r, "hlc"), "holds");
    assert_eq!(status(&r, "uls"), "fails");
}

#[test]
fn unknown_builtin_is_an_input_error() {
    let out = run(&["check", "--builtin", "no-such-fixture", "--at", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_json_is_an_input_error() {
    let path = tmp("bad.json");
    std::fs::write(&path, "{\"cone\": [").unwrap();
    let out = run(&["check", "--fixture", path.to_str().unwrap(), "--at", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_point_is_an_input_error() {
    let out = run(&["check", "--builtin", "switch-on", "--at", "zero"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["check", "--builtin", "switch-on", "--at", "0,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_is_an_input_error() {
    let out = run(&["check", "--builtin", "switch-on", "--at", "0", "--rho", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fixture_file_round_trips_and_wrong_labels_exit_one() {
    let fx = builtin("switch-on").unwrap();
    let mut v = fixture_to_json(&fx).unwrap();
    let path = tmp("switch-on.json");
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let out = run(&["check", "--fixture", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    // flip a label: the run must report the mismatch
    v["labels"][0]["expect"]["eff"] = Value::String("holds".into());
    let path = tmp("switch-on-wrong.json");
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let out = run(&["check", "--fixture", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["summary"]["label_mismatches"], 1);
    assert_eq!(r["points"][0]["mismatches"][0]["concept"], "eff");
}

#[test]
fn duality_has_zero_gap() {
    let out = run(&["duality", "--builtin", "two-kinks"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["duality"]["gap"].as_f64(), Some(0.0));
    assert_eq!(r["weak_duality"]["status"], "holds");
}

#[test]
fn duality_refuses_irregular_fixture() {
    let out = run(&["duality", "--builtin", "cliff"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert!(r["refused"].as_str().unwrap().contains("regularity"));
}

#[test]
fn duality_needs_a_bivariate_fixture() {
    let out = run(&["duality", "--builtin", "switch-on"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_is_an_input_error() {
    let out = run(&["duality", "--fixture", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corpus_is_deterministic_and_clean() {
    let a = run(&["corpus", "--n-random", "2", "--seed", "7"]);
    let b = run(&["corpus", "--n-random", "2", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a);
    assert_eq!(r["summary"]["label_mismatches"], 0);
    assert_eq!(r["summary"]["diagram_violations"], 0);
    assert_eq!(r["random"].as_array().unwrap().len(), 2);
    assert!(r.get("timings").is_none());
}

#[test]
fn out_flag_writes_the_report() {
    let path = tmp("report.json");
    let out = run(&["check", "--builtin", "switch-on", "--at", "0", "--out", path.to_str().unwrap(), "--timings"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(r["timings"]["total_seconds"].is_number());
    assert_eq!(r["fixture"], "switch-on");
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_upperset"))
        .args(["check", "--builtin", "switch-on", "--at", "0"])
        .env("UPPERSET_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let capped = Command::new(env!("CARGO_BIN_EXE_upperset"))
        .args(["check", "--builtin", "switch-on", "--at", "0"])
        .env("UPPERSET_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(0));
    assert_eq!(capped.stdout, run(&["check", "--builtin", "switch-on", "--at", "0"]).stdout);
}
