use std::path::Path;
use std::process::{Command, Output};

use robustcsp::format;
use robustcsp::semigroup::builtin_semigroup;

fn robustcsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robustcsp")).args(args).env_remove("ROBUSTCSP_GUARD").output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn put(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const C4: &str = "p edge 4 4\ne 1 2\ne 2 3\ne 3 4\ne 4 1\n";
const SINGLE_CLAUSE: &str = "p nae3 3 1\n1 2 3 0\n";

#[test]
fn four_cycle_is_two_robust_for_k3() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = put(dir.path(), "c4.col", C4);
    let out = robustcsp(&["check", "robust", "--k", "2", "--template", "K3", "-i", &c4]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "true");
}

#[test]
fn rigid_pin_exits_one_with_witness() {
    // K4 has no 3-colouring, so even a single pinned vertex is rigid
    let dir = tempfile::tempdir().unwrap();
    let k4 = put(dir.path(), "k4.col", "p edge 4 6\ne 1 2\ne 1 3\ne 1 4\ne 2 3\ne 2 4\ne 3 4\n");
    let out = robustcsp(&["check", "robust", "--k", "1", "--template", "K3", "-i", &k4]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("false\nrigid: "));
}

#[test]
fn guard_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = put(dir.path(), "c4.col", C4);
    let out = robustcsp(&["--guard", "5", "check", "robust", "--k", "2", "--template", "K3", "-i", &c4]);
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_robustcsp"))
        .args(["check", "robust", "--k", "2", "--template", "K3", "-i", &c4])
        .env("ROBUSTCSP_GUARD", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn wide_nae_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let wide = put(dir.path(), "wide.nae", "p nae 4 1 4\n1 2 3 4 0\n");
    let run = dir.path().join("run");
    let out = robustcsp(&["pipeline", "run", "-i", &wide, "--k", "2", "-o", run.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(robustcsp(&["check", "robust"]).status.code(), Some(2));
    assert_eq!(robustcsp(&["semigroup", "iso", "B21", "/nonexistent.sgp"]).status.code(), Some(2));
}

#[test]
fn brandt_identities() {
    let dir = tempfile::tempdir().unwrap();
    let b21 = put(dir.path(), "b21.sgp", &format::write_groupoid(&builtin_semigroup("B21").unwrap().into_groupoid()));
    let out = robustcsp(&["semigroup", "check-id", &b21, "aba=a"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "true");
    let out = robustcsp(&["semigroup", "check-id", &b21, "xy=yx"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(robustcsp(&["semigroup", "lds", &b21]).status.code(), Some(1));
    let out = robustcsp(&["--format", "json", "semigroup", "iso", &b21, "B21"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["isomorphic"], true);
}

#[test]
fn green_relations_of_brandt_monoid() {
    let out = robustcsp(&["--format", "json", "semigroup", "green", "B21"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["h_trivial"], true);
    // {1}, {a, b, ab, ba}, {0}
    assert_eq!(v["J"].as_array().unwrap().len(), 3);
}

#[test]
fn frozen_and_uhc_reports() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = put(dir.path(), "c4.col", C4);
    let out = robustcsp(&["--format", "json", "check", "frozen", "--relation", "eq", "--template", "K3", "-i", &c4]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["satisfiable"], true);
    assert!(v["frozen_in"].as_array().unwrap().is_empty());
    let out = robustcsp(&["check", "uhc", "--template", "K3", "-i", &c4]);
    assert!(matches!(out.status.code(), Some(0 | 1)));
    assert!(stdout(&out).starts_with("true") || stdout(&out).starts_with("false"));
}

#[test]
fn pipeline_run_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let input = put(dir.path(), "one.nae", SINGLE_CLAUSE);
    let run = dir.path().join("run");
    let out = robustcsp(&[
        "pipeline",
        "run",
        "-i",
        &input,
        "--skip-amplification",
        "--stages",
        "graph,1in3",
        "-o",
        run.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("graph: "));
    let report = dir.path().join("report.json");
    let out = robustcsp(&["pipeline", "verify", run.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert!(rows.iter().all(|r| r["status"] != "FAIL"));
    assert!(rows.iter().any(|r| r["stage"] == "graph" && r["check"] == "triangulated" && r["status"] == "PASS"));
}

#[test]
fn graph_algebra_law() {
    let dir = tempfile::tempdir().unwrap();
    let edge = put(dir.path(), "edge.col", "p edge 2 1\ne 1 2\n");
    let out = robustcsp(&["semigroup", "graph-algebra", "-i", &edge]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("3 elements\nlaw v1 v2 v1 = x x\n"));
}
