use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.graph"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conjcount")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn entropy_of_rose() {
    let f = fixture("rose_1_1");
    let v = json(&run(&["entropy", f.to_str().unwrap()]));
    let h = v["result"]["h"].as_f64().unwrap();
    assert!((h - 1.0986122886681098).abs() < 1e-12);
    assert_eq!(v["result"]["depth"], 2);
    assert_eq!(v["seed"], 1);
}

#[test]
fn class_count_of_rose() {
    let f = fixture("rose_1_1");
    let v = json(&run(&["conj", f.to_str().unwrap(), "--word", "a", "--T", "9"]));
    assert_eq!(v["result"]["counts"][0], 81);
    assert_eq!(v["result"]["provenance"]["seed"], 1);
    assert_eq!(v["result"]["provenance"]["arithmeticity"]["verdict"], "LATTICE");
}

#[test]
fn bad_degree_is_an_input_error() {
    let f = fixture("bad_degree");
    let out = run(&["validate", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degree < 3"));
}

#[test]
fn exit_codes() {
    let f = fixture("rose_1_1");
    let f = f.to_str().unwrap();
    let out = run(&["count", f, "--T", "40", "--budget", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
    assert_eq!(run(&["count", f]).status.code(), Some(1));
    assert_eq!(run(&["conj", f, "--word", "x", "--T", "3"]).status.code(), Some(1));
    assert_eq!(run(&["entropy", "/nonexistent.graph"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let f = fixture("theta_1_f1_f2");
    let args = ["report", f.to_str().unwrap(), "--word", "a b", "--T", "6"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn canonical_graph_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["rose_1_sqrt2", "theta_1_f1_f2", "barbell_unit"] {
        let first = json(&run(&["validate", fixture(name).to_str().unwrap()]));
        let text = first["result"]["canonical"].as_str().unwrap();
        let path = dir.path().join(format!("{name}.graph"));
        std::fs::write(&path, text).unwrap();
        let second = json(&run(&["validate", path.to_str().unwrap()]));
        assert_eq!(second["result"]["canonical"], first["result"]["canonical"]);
    }
}

#[test]
fn csv_projection_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let f = fixture("rose_1_sqrt2");
    let status = run(&[
        "scan",
        f.to_str().unwrap(),
        "--tmin",
        "0.25",
        "--tmax",
        "25",
        "--steps",
        "8",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].contains("seed=1"));
    assert_eq!(lines[1], "t,lower,upper,flag");
    assert_eq!(lines.len(), 10);
    assert!(lines[2..].iter().all(|l| l.ends_with("false")));
    let e = run(&["entropy", f.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(e.status.code(), Some(1));
}

#[test]
fn stabilize_lists_the_table() {
    let f = fixture("theta_unit");
    let v = json(&run(&["stabilize", f.to_str().unwrap(), "--seed", "7"]));
    assert_eq!(v["result"]["depth"], 3);
    assert_eq!(v["seed"], 7);
    // words of length at most 3 in rank 2
    assert_eq!(v["result"]["r_table"].as_array().unwrap().len(), 1 + 4 + 12 + 36);
}

#[test]
fn douma_needs_a_regular_unit_graph() {
    let v = json(&run(&["douma", fixture("rose_1_1").to_str().unwrap(), "--word", "a", "--nmax", "9"]));
    assert!(v["result"]["rows"].as_array().unwrap().iter().all(|r| r["ratio"] == 1.0));
    let out = run(&["douma", fixture("rose_1_2").to_str().unwrap(), "--word", "a"]);
    assert_eq!(out.status.code(), Some(1));
}
