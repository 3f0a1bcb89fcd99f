use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ultraflow")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn constants_reports_closed_forms() {
    let out = run(&["constants", "--d", "5", "--p", "3.1875"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert!(v["gamma1"].as_f64().unwrap().abs() < 1e-15);
    assert!((v["two_sharp"].as_f64().unwrap() - 3.1875).abs() < 1e-15);

    let v = json(&run(&["constants", "--d", "5", "--p", "3.3333", "--beta", "1.5"]));
    assert!(v["beta"]["gamma"].as_f64().unwrap().abs() < 1e-4);

    let v = json(&run(&["constants", "--d", "2", "--p", "7"]));
    assert_eq!(v["two_star"], "+inf");
}

#[test]
fn parameter_errors_exit_with_two() {
    for args in [
        vec!["constants", "--d", "0.5", "--p", "3"],
        vec!["constants", "--d", "5", "--p", "4"],
        vec!["counterexample", "--d", "5", "--p", "3"],
        vec!["flow", "--form", "bogus", "--d", "5", "--p", "3"],
        vec!["flow", "--form", "heat", "--d", "5", "--p", "3", "--init", "spline:1"],
        vec!["verify", "nonsense"],
        vec!["improve", "--d", "4", "--p", "3", "-N", "16"],
        vec!["constants", "--d"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let v = json(&run(&["constants", "--d", "0.5", "--p", "3"]));
    assert!(v["error"].as_str().unwrap().contains("dimension"));
}

#[test]
fn numerical_failures_exit_with_three() {
    // the conformal datum needs many more modes than N = 8 gives it
    let out = run(&["flow", "--form", "heat", "--d", "5", "--p", "3", "--init", "conformal:1,0.99", "-N", "8"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_suites_report_tap() {
    let out = run(&["verify", "lemma-identities"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("TAP version 13\n1..4\n"));
    assert!(!text.contains("not ok"));

    let out = run(&["verify", "heat-monotone", "--d", "5", "--p", "3", "--samples", "10"]);
    assert!(out.status.success());

    let out = run(&["verify", "second-obstruction", "--d", "5", "--p", "3.25"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("ok 1 - dF/dt positive"));
}

#[test]
fn failed_invariants_exit_with_four() {
    // the rational terms of the second identity are not integrated exactly on 16 fine nodes
    let out = run(&["verify", "lemma-identities", "-N", "8"]);
    assert_eq!(out.status.code(), Some(4));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("not ok 2 - second identity"));
    assert!(text.contains("ok 1 - first identity"));
}

#[test]
fn out_dir_holds_artifacts_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--out", dir.path().to_str().unwrap(), "region", "--d", "5", "--n-p", "11", "--n-beta", "21", "--curves"]);
    assert!(out.status.success());
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "region");
    let names: Vec<&str> = manifest["artifacts"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(names, ["result.json", "region.csv", "beta_curves.csv"]);
    for n in &names {
        assert!(dir.path().join(n).exists());
    }
    assert_eq!(read_json(&dir.path().join("result.json"))["manifest"], "manifest.json");
    let csv = fs::read_to_string(dir.path().join("region.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 11 * 21);
    let curves = fs::read_to_string(dir.path().join("beta_curves.csv")).unwrap();
    assert_eq!(curves.lines().next().unwrap(), "d,p,beta_minus,beta_plus");
}

fn rerun_is_identical(args: &[&str]) {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let mut full = vec!["--out", dir.path().to_str().unwrap()];
        full.extend_from_slice(args);
        let out = run(&full);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let manifest = read_json(&a.path().join("manifest.json"));
    for name in manifest["artifacts"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).chain(["manifest.json"]) {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn manifests_reproduce_bit_identically() {
    rerun_is_identical(&["flow", "--form", "W_Nonlinear", "--d", "5", "--p", "3.3", "--init", "random:7,6", "--t-end", "0.2", "--samples", "5"]);
    rerun_is_identical(&["improve", "--d", "4", "--p", "3", "--restarts", "3", "--seed", "5", "--verify-samples", "20"]);
    rerun_is_identical(&["counterexample", "--d", "5", "--p", "3.25", "--certificate", "3,5", "--certificate-points", "10"]);
}

#[test]
fn flow_summary_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--out", dir.path().to_str().unwrap(), "flow", "--form", "Rho_FDE", "--d", "3", "--p", "6", "--init",
        "perturb:0.2,2", "--t-end", "0.5", "--samples", "10",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("result.json"));
    assert_eq!(v["spec"]["beta"], "+inf");
    assert_eq!(v["monotone"], true);
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["N"], 64);
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn counterexample_dispatches_on_p() {
    let v = json(&run(&["counterexample", "--d", "5", "--p", "3.3333333333333335"]));
    assert_eq!(v["obstruction"], "first");
    let v = json(&run(&["counterexample", "--d", "5", "--p", "3.25"]));
    assert_eq!(v["obstruction"], "second");
    assert_eq!(v["report"]["positive"], true);
}
