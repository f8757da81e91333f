use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use gangsched::export::parse_csv;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples/data")
        .join(name)
}

fn gangsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gangsched"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_exit_codes() {
    let f = data("inversion.json");
    let f = f.to_str().unwrap();
    let o = gangsched(&["analyze", f, "--policy", "gang-fjp"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not predictable"));

    let o = gangsched(&["analyze", f, "--policy", "gang-fjp", "--force"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("window: [0, 5)"));
    assert!(stdout(&o).contains("worst-case schedulable only"));

    let o = gangsched(&["analyze", f, "--policy", "limited", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schedulable"], false);
    assert_eq!(v["witness"]["DeadlineMiss"]["label"], "T3");
}

#[test]
fn invalid_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{ "version": 1, "platform": { "m": 1 }, "tasks": [ { "id": "a", "O": 0, "v": 2, "C": 1, "D": 1, "T": 1 } ] }"#)
        .unwrap();
    let o = gangsched(&["analyze", bad.to_str().unwrap(), "--policy", "idling"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("width 2 exceeds platform size 1"));
    let o = gangsched(&["analyze", "/nonexistent.json", "--policy", "idling"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gangsched(&["simulate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn horizon_cap_from_environment() {
    let f = data("inversion.json");
    let o = Command::new(env!("CARGO_BIN_EXE_gangsched"))
        .args([
            "simulate",
            f.to_str().unwrap(),
            "--policy",
            "idling",
            "--horizon",
            "50",
        ])
        .env("GANGSCHED_HORIZON_CAP", "40")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds the configured cap 40"));
}

#[test]
fn simulate_then_export() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.json");
    let csv = dir.path().join("trace.csv");
    let svg = dir.path().join("trace.svg");
    let f = data("inversion.json");
    let o = gangsched(&[
        "simulate",
        f.to_str().unwrap(),
        "--policy",
        "gang-fjp",
        "--horizon",
        "5",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = gangsched(&[
        "export",
        trace.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,p1,p2,p3\n0,T1,T1,T3\n"));
    assert_eq!(parse_csv(&text).unwrap().rows.len(), 5);
    gangsched(&[
        "export",
        trace.to_str().unwrap(),
        "--format",
        "svg",
        "--out",
        svg.to_str().unwrap(),
    ]);
    let svg = fs::read_to_string(&svg).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn simulate_with_profile_reports_the_miss() {
    let f = data("anomaly_jobs.json");
    let p = data("early_j1.json");
    let o = gangsched(&[
        "simulate",
        f.to_str().unwrap(),
        "--policy",
        "gang-fjp",
        "--profile",
        p.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("deadline miss: J3 at 2"));
    let o = gangsched(&[
        "simulate",
        f.to_str().unwrap(),
        "--policy",
        "idling",
        "--profile",
        p.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn fuzz_reports_and_echoes_seed() {
    let f = data("anomaly_jobs.json");
    let f = f.to_str().unwrap();
    let o = gangsched(&[
        "fuzz",
        f,
        "--policy",
        "gang-fjp",
        "--strategy",
        "exhaustive",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o)
        .contains("violation: profile [1, 1, 2], job J3: FinishAfterWorst observed 3 limit 2"));
    let o = gangsched(&[
        "fuzz",
        f,
        "--policy",
        "idling",
        "--strategy",
        "random",
        "--seed",
        "42",
        "--count",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed: 42"));
    assert!(stdout(&o).contains("profiles tested: 10"));
    let o = gangsched(&["fuzz", f, "--policy", "gang-fjp", "--cap", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fuzz_unrolls_periodic_tasks() {
    let f = data("inversion.json");
    let o = gangsched(&[
        "fuzz",
        f.to_str().unwrap(),
        "--policy",
        "slack-reclaiming",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["profile_space"], 2 * 3 * 4);
    assert_eq!(v["applicable"], true);
}
