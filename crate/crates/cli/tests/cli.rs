use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn properad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_properad")).args(args).output().expect("binary runs")
}

fn fx(name: &str) -> String {
    fixture(name).display().to_string()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn words(v: &Value) -> Vec<Vec<String>> {
    serde_json::from_value(v.clone()).unwrap()
}

#[test]
fn glue_three_pair_golden() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("s.dot");
    let o = properad(&["glue-open", &fx("golden_surfaces.json"), &fx("golden_gluing.json"), "--dot", dot.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(words(&v["out_cycles"]), [vec!["x1", "x8"], vec!["x4", "x5", "x6"]]);
    assert_eq!(words(&v["in_cycles"]), [vec!["y1", "y2", "y3"], vec!["y5", "z2", "z3", "z4"]]);
    let d = std::fs::read_to_string(dot).unwrap();
    assert!(d.starts_with("digraph surface {") && d.contains("\"x8\" -> \"x1\";"));
}

#[test]
fn glue_two_disks_gives_annulus() {
    let o = properad(&["glue-open", &fx("disks.json"), &fx("disk_gluing.json")]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    // Two disks glued along one segment pair: χ_top = 1 + 1 − 1 − 1 split.
    assert_eq!(v["genus"], 0);
    assert_eq!(v["boundaries"], 2);
    assert_eq!(words(&v["out_cycles"]), [vec!["c2"]]);
    assert_eq!(words(&v["in_cycles"]), [vec!["b2"]]);
}

#[test]
fn glue_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "[{\"genus\": 0,").unwrap();
    assert_eq!(code(&properad(&["glue-open", bad.to_str().unwrap(), &fx("disk_gluing.json")])), 2);
    std::fs::write(&bad, r#"{"pairs": [["nope", "c1"]]}"#).unwrap();
    let o = properad(&["glue-open", &fx("disks.json"), bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn cobar_closed_passes() {
    let o = properad(&["cobar-d2", "closed-frobenius", "--chi-max", "6", "--m-max", "3", "--segments-max", "6"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["status"], "PASS");
    assert_eq!(v["generators"], 45);
}

#[test]
fn cobar_open_passes() {
    let o = properad(&["cobar-d2", "open-frobenius", "--segments-max", "4", "--m-max", "4", "--chi-max", "4", "--max-edges", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["status"], "PASS");
}

#[test]
fn cobar_mutation_fails_with_witness() {
    let o = properad(&["cobar-d2", "mutated-closed-frobenius", "--m-max", "2", "--segments-max", "4"]);
    assert_eq!(code(&o), 1);
    assert!(json(&o)["witness"].as_str().unwrap().starts_with("∂²("));
}

#[test]
fn cobar_usage_errors() {
    assert_eq!(code(&properad(&["cobar-d2", "end"])), 2);
    assert_eq!(code(&properad(&["cobar-d2", "no-such-properad"])), 2);
}

#[test]
fn axioms_bundled_properads() {
    for p in ["closed-frobenius", "open-frobenius"] {
        let o = properad(&["axioms", p]);
        assert_eq!(code(&o), 0, "{p}");
        assert!(json(&o)["cases"].as_u64().unwrap() > 0);
    }
    let o = properad(&["axioms", "end", "--dgvs", &fx("closed_dgvs.json"), "--m-max", "1", "--n-max", "1", "--segments-max", "4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&properad(&["axioms", "end"])), 2);
}

#[test]
fn axioms_zero_bound_is_vacuous() {
    let o = properad(&["axioms", "closed-frobenius", "--chi-max", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["cases"], 0);
}

#[test]
fn axioms_mutation_fails() {
    let o = properad(&["axioms", "mutated-closed-frobenius"]);
    assert_eq!(code(&o), 1);
    assert!(!json(&o)["violations"].as_array().unwrap().is_empty());
}

fn components(v: &Value) -> Vec<(u64, u64, i64, String)> {
    v["components"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["m"].as_u64().unwrap(), c["n"].as_u64().unwrap(), c["chi"].as_i64().unwrap(), c["status"].as_str().unwrap().into()))
        .collect()
}

#[test]
fn check_zero_structure_passes() {
    let o = properad(&["check", "closed", &fx("closed_dgvs.json"), &fx("zero.json")]);
    assert_eq!(code(&o), 0);
    assert!(components(&json(&o)).iter().all(|c| c.3 != "FAIL"));
}

#[test]
fn check_sampled_solution_with_cross_check() {
    let args = ["--chi-max", "4", "--m-max", "6", "--n-max", "6", "--cross-check", "both"];
    let o = properad(&[&["check", "closed", &fx("closed_dgvs.json"), &fx("closed_solution.json")][..], &args].concat());
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["agree"], true);
    assert_eq!(v["master"], v["operator"]);
    assert_eq!(v["master"], v["components"]);
    assert!(components(&v["master"]).iter().all(|c| c.3 == "PASS"));
}

#[test]
fn check_names_failing_component() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = properad(&[
        "check", "closed", &fx("graded.json"), &fx("closed_violation.json"),
        "--chi-max", "3", "--m-max", "6", "--n-max", "6", "--cross-check", "operator", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["agree"], true);
    let fails: Vec<_> = components(&v["master"]).into_iter().filter(|c| c.3 == "FAIL").map(|c| (c.0, c.1, c.2)).collect();
    assert_eq!(fails, [(1, 0, 3)]);
}

#[test]
fn check_open_flavor() {
    let args = ["--chi-max", "8", "--m-max", "2", "--n-max", "2", "--complete"];
    let o = properad(&[&["check", "open", &fx("graded.json"), &fx("open_mutation.json")][..], &args].concat());
    assert_eq!(code(&o), 1);
    let fails: Vec<_> = components(&json(&o)).into_iter().filter(|c| c.3 == "FAIL").collect();
    assert_eq!(fails.len(), 1);
    // Without completeness the open components cannot be decided.
    let o = properad(&["check", "open", &fx("graded.json"), &fx("open_mutation.json"), "--chi-max", "8"]);
    assert_eq!(code(&o), 0);
    assert!(components(&json(&o)).iter().any(|c| c.3 == "SKIPPED"));
}

#[test]
fn check_input_errors() {
    // d² ≠ 0 is rejected when the space is loaded.
    assert_eq!(code(&properad(&["check", "closed", &fx("d_squared_nonzero.json"), &fx("zero.json")])), 2);
    // Flavor mismatch between the command and the document.
    assert_eq!(code(&properad(&["check", "open", &fx("graded.json"), &fx("zero.json")])), 2);
    assert_eq!(code(&properad(&["check", "open", &fx("graded.json"), &fx("open_mutation.json"), "--cross-check", "operator"])), 2);
    assert_eq!(code(&properad(&["check", "closed", &fx("graded.json")])), 2);
}

#[test]
fn sample_is_seeded_and_solves() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, tag: &str| {
        let (d, s) = (dir.path().join(format!("d{tag}.json")), dir.path().join(format!("s{tag}.json")));
        let o = Command::new(env!("CARGO_BIN_EXE_properad"))
            .env("PROPERAD_SEED", seed)
            .args(["sample", "--out-dgvs", d.to_str().unwrap(), "--out-structure", s.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        (std::fs::read_to_string(&d).unwrap(), std::fs::read_to_string(&s).unwrap(), d, s)
    };
    let a = run("5", "a");
    let b = run("5", "b");
    assert_eq!((&a.0, &a.1), (&b.0, &b.1));
    let o = properad(&["check", "closed", a.2.to_str().unwrap(), a.3.to_str().unwrap(), "--m-max", "6", "--n-max", "6", "--cross-check", "both"]);
    assert_eq!(code(&o), 0);
    let bad = Command::new(env!("CARGO_BIN_EXE_properad"))
        .env("PROPERAD_SEED", "not-a-number")
        .args(["sample", "--out-dgvs", "/dev/null", "--out-structure", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn output_is_deterministic() {
    let args = ["check", "closed", &fx("closed_dgvs.json"), &fx("closed_solution.json"), "--cross-check", "both"];
    assert_eq!(properad(&args).stdout, properad(&args).stdout);
}
