use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use carnot_bcp::besicovitch::{BesicovitchFamily, SearchOutcome};
use carnot_bcp_cli::{
    canonical_report, parse_report, CertifyEcho, CertifyResult, ClassifyConfig, ClassifyResult, RunReport, SearchEcho,
    Status,
};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carnot-bcp")).args(args).env_remove("CARNOT_BCP_JOBS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn without_timing(text: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(text).unwrap();
    v.as_object_mut().unwrap().remove("elapsed_ms");
    v
}

#[test]
fn classify_nonstandard_heisenberg() {
    let o = run(&["classify", "--group", "heisenberg_nonstandard", "--alpha", "2"]);
    assert_eq!(code(&o), 0);
    let r: RunReport<ClassifyConfig, ClassifyResult> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!r.result.bcp_admissible);
    let w = r.result.witness.unwrap();
    assert_eq!((w.t.as_str(), w.s.as_str()), ("1", "2"));
    assert!(r.result.heisenberg_quotient.unwrap().valid);
    assert_eq!(r.config.group.as_deref(), Some("heisenberg_nonstandard(2)"));
}

#[test]
fn classify_stratified_and_file_algebras() {
    let o = run(&["classify", "--group", "product(free_step2(2),power(heisenberg(1),2))"]);
    assert_eq!(code(&o), 0);
    let r: RunReport<ClassifyConfig, ClassifyResult> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.result.bcp_admissible);
    let d = r.result.decomposition.unwrap();
    assert!(d.isomorphism_valid && d.factors.len() == 2);

    let path = fixture("step3.json");
    let o = run(&["classify", "--algebra", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["commuting_different_layers"], false);
    assert_eq!(v["result"]["stratification"]["is_stratification"], true);
    assert_eq!(v["result"]["heisenberg_quotient"]["valid"], true);
}

#[test]
fn verify_line_family_and_tampered_copy() {
    let path = fixture("line_family.json");
    let o = run(&["besicovitch", "verify", "--family", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["result"]["cardinality"], 2);

    let dir = tempfile::tempdir().unwrap();
    let mut fam: BesicovitchFamily = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    fam.radii[1] = carnot_bcp::scalar::rat(1, 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&fam).unwrap()).unwrap();
    let o = run(&["besicovitch", "verify", "--family", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["violation"]["kind"], "witness_outside");
    assert_eq!(err["violation"]["ball"], 2);
    assert_eq!(json(&o)["status"], "rejected");
}

#[test]
fn certify_away_example() {
    let o = run(&["certify-lemmas", "--lemma", "away", "--rank", "2", "--R", "1", "--samples", "10000", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let r: RunReport<CertifyEcho, CertifyResult> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.result.total_violations, 0);
    assert_eq!(r.result.sweeps[0].hypothesis_satisfying, 10_000);
    assert!(r.result.sweeps[0].epsilon.is_some());
}

#[test]
fn certify_aq_with_exact_samples() {
    let o = run(&[
        "certify-lemmas",
        "--lemma",
        "aq",
        "--rank",
        "3",
        "--R",
        "1/2",
        "--samples",
        "2000",
        "--seed",
        "1",
        "--exact-samples",
        "100",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["aq_exact"]["samples"], 100);
    assert_eq!(v["result"]["total_violations"], 0);
}

#[test]
fn search_then_verify_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("fam.json");
    let rep = dir.path().join("search.json");
    let args = [
        "besicovitch",
        "search",
        "--group",
        "free_step2(2)",
        "--budget",
        "2000",
        "--seed",
        "3",
        "--family-out",
        fam.to_str().unwrap(),
        "--output",
        rep.to_str().unwrap(),
    ];
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read(&rep).unwrap();
    let r: RunReport<SearchEcho, SearchOutcome> = serde_json::from_slice(&text).unwrap();
    assert!(r.result.certificate.valid && r.result.family.len() >= 2);

    let o = run(&["besicovitch", "verify", "--family", fam.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["result"]["cardinality"], r.result.family.len());

    let o = run(&["report", rep.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let summary = json(&o);
    assert_eq!(summary["result"]["all_ok"], true);
    assert_eq!(summary["result"]["reports"][0]["command"], "besicovitch search");
    // The summary is itself a report.
    assert_eq!(parse_report(&String::from_utf8_lossy(&o.stdout), "summary").unwrap().status, Status::Ok);
}

#[test]
fn reports_are_reproducible_across_job_counts() {
    let base = [
        "besicovitch",
        "search",
        "--group",
        "heisenberg_nonstandard",
        "--alpha",
        "2",
        "--budget",
        "1500",
        "--seed",
        "9",
        "--combined",
    ];
    let one = run(&[&base[..], &["--jobs", "1"]].concat());
    let four = run(&[&base[..], &["--jobs", "4"]].concat());
    let again = run(&[&base[..], &["--jobs", "4"]].concat());
    assert_eq!(code(&one), 0);
    assert_eq!(without_timing(&one.stdout), without_timing(&four.stdout));
    assert_eq!(without_timing(&four.stdout), without_timing(&again.stdout));
    let c = run(&["certify-lemmas", "--lemma", "inbetween", "--samples", "500", "--seed", "2"]);
    let d = run(&["certify-lemmas", "--lemma", "inbetween", "--samples", "500", "--seed", "2", "--jobs", "2"]);
    assert_eq!(without_timing(&c.stdout), without_timing(&d.stdout));
}

#[test]
fn every_command_round_trips_through_report() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["classify", "--group", "free_step2(3)"],
        vec!["dist", "eval", "--group", "heisenberg(1)", "--p", "1/2,0,0", "--q", "0,1,-1/3"],
        vec!["dist", "eval", "--kind", "cc-h1", "--p", "0,0,0", "--q", "0,0,1"],
        vec!["besicovitch", "cover", "--random", "300", "--seed", "5"],
        vec!["certify-lemmas", "--lemma", "small_angles", "--samples", "300", "--seed", "4"],
        vec!["countable-space", "--n", "60", "--ball-check", "500", "--grid", "16"],
    ];
    let mut paths = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let o = run(args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let path = dir.path().join(format!("{i}.json"));
        std::fs::write(&path, &o.stdout).unwrap();
        let text = String::from_utf8(o.stdout.clone()).unwrap();
        assert_eq!(canonical_report(&text, "out").unwrap(), text);
        paths.push(path);
    }
    let mut args = vec!["report".to_string()];
    args.extend(paths.iter().map(|p| p.display().to_string()));
    let o = run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["result"]["reports"].as_array().unwrap().len(), runs.len());
}

#[test]
fn dist_values() {
    let o = run(&["dist", "eval", "--kind", "cc-h1", "--p", "0,0,0", "--q", "0,0,1"]);
    let v = json(&o);
    assert!((v["result"]["value"].as_f64().unwrap() - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-6);
    assert_eq!(v["result"]["backend"], "float");
    let o = run(&["dist", "eval", "--kind", "countable-space", "--n", "10", "--p", "3", "--q", "5"]);
    assert_eq!(json(&o)["result"]["exact_base"], "4/5");
    let o = run(&["dist", "eval", "--kind", "power", "--group", "abelian(1)", "--t", "2", "--p", "0", "--q", "4"]);
    let v = json(&o);
    assert_eq!(v["result"]["value"], 2.0);
    assert_eq!(v["result"]["backend"], "exact");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["classify", "--group", "nope(1)"])), 64);
    assert_eq!(code(&run(&["classify", "--group", "heisenberg(1)", "--alpha", "2"])), 64);
    assert_eq!(code(&run(&["besicovitch", "verify", "--family", "/nonexistent/fam.json"])), 64);
    assert_eq!(code(&run(&["besicovitch", "search", "--group", "heisenberg(1)", "--budget", "10"])), 64);
    assert_eq!(code(&run(&["dist", "eval", "--group", "heisenberg(1)", "--p", "1,2", "--q", "0,0,0"])), 64);
    assert_eq!(code(&run(&["certify-lemmas", "--lemma", "nope", "--seed", "1"])), 64);
    let o = run(&["countable-space", "--grid", "0"]);
    assert_eq!(code(&o), 64);
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "config");
}

#[test]
fn jobs_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_carnot-bcp"))
        .args(["countable-space", "--n", "20"])
        .env("CARNOT_BCP_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 64);
}

#[test]
fn cover_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pts.json");
    std::fs::write(&input, r#"{"points": [[0.0], [0.5], [3.0]], "radii": [1.0, 0.25, 0.1]}"#).unwrap();
    let o = run(&["besicovitch", "cover", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["selected"], serde_json::json!([0, 2]));
    assert_eq!(v["config"]["distance"]["group"], "abelian(1)");
}
