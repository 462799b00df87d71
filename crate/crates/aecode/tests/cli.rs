use std::path::{Path, PathBuf};
use std::process::Command;

use aecode::cli::{run, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("aecode").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("aecode-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn construct(name: &str, args: &[&str]) -> PathBuf {
    let path = scratch(name);
    let mut full = vec!["construct"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", path.to_str().unwrap()]);
    let (code, _, err) = call(&full);
    assert_eq!(code, EXIT_PASS, "{err}");
    path
}

fn verify(path: &Path, extra: &[&str]) -> (i32, Value) {
    let mut args = vec!["verify", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, out, err) = call(&args);
    assert!(code != EXIT_USAGE, "{err}");
    (code, serde_json::from_str(&out).unwrap())
}

#[test]
fn every_family_round_trips_through_verify() {
    let cases: [(&str, &[&str], &[&str]); 5] = [
        ("sym.json", &["symmetric", "--ell", "6", "--m1", "3", "--m2", "6"], &[]),
        ("cs.json", &["counter-symmetric", "--ell", "9/2", "--m1", "3/2", "--m2", "9/2"], &[]),
        ("det.json", &["detection", "--ell", "2", "--m", "2"], &["--mode", "detect"]),
        ("csd.json", &["counter-symmetric", "--ell", "3", "--m1", "1", "--m2", "3", "--detect"], &["--mode", "detect"]),
        ("bin2.json", &["binomial", "--n", "2", "--ell0", "25/2", "--m0", "25/2"], &["--order", "2"]),
    ];
    for (file, args, extra) in cases {
        let path = construct(file, args);
        let (code, report) = verify(&path, extra);
        assert_eq!(code, EXIT_PASS, "{file}: {report}");
        assert_eq!(report["passed"], Value::Bool(true), "{file}");
    }
}

#[test]
fn detection_code_fails_correction_with_exit_two() {
    let path = construct("det-fail.json", &["detection", "--ell", "2", "--m", "2"]);
    let (code, report) = verify(&path, &["--mode", "correct"]);
    assert_eq!(code, EXIT_FAIL);
    assert_eq!(report["passed"], Value::Bool(false));
}

#[test]
fn invalid_parameters_and_input_exit_one() {
    let (code, out, err) = call(&["construct", "symmetric", "--ell", "5", "--m1", "3", "--m2", "5"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.is_empty());
    assert!(err.contains("ℓ ≥ 6"), "{err}");

    let bad = scratch("bad.json");
    std::fs::write(&bad, "{\"ell0_times_2\": 12,").unwrap();
    assert_eq!(call(&["verify", bad.to_str().unwrap()]).0, EXIT_USAGE);
    assert_eq!(call(&["verify", scratch("missing.json").to_str().unwrap()]).0, EXIT_USAGE);
    assert_eq!(call(&["no-such-command"]).0, EXIT_USAGE);
    assert_eq!(call(&["props", "--tolerance", "-1"]).0, EXIT_USAGE);
    assert_eq!(call(&["props", "--format", "csv"]).0, EXIT_USAGE);
}

#[test]
fn oversized_scan_is_refused() {
    let (code, out, err) =
        call(&["scan", "--ansatz", "exhaustive_small", "--max-ell", "30", "--max-points", "6"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.is_empty());
    assert!(!err.is_empty());
}

#[test]
fn help_goes_to_stdout() {
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, EXIT_PASS);
    assert!(out.contains("verify"));
}

#[test]
fn search_reports_the_symmetric_solution() {
    let (code, out, _) = call(&["search", "--ell0", "6", "--support0=-3,3", "--support1=-6,0,6"]);
    assert_eq!(code, EXIT_PASS);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["feasible"], Value::Bool(true));
    assert_eq!(v["particular"]["p"], serde_json::json!(["1/2", "1/2"]));
    assert_eq!(v["particular"]["q"], serde_json::json!(["1/8", "3/4", "1/8"]));
}

#[test]
fn infeasible_search_still_exits_zero() {
    let (code, out, _) = call(&["search", "--ell0", "6", "--support0=-1,1", "--support1=-4,4"]);
    assert_eq!(code, EXIT_PASS);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["feasible"], Value::Bool(false));
}

#[test]
fn scan_csv_lists_the_minimal_counter_symmetric_code() {
    let (code, out, err) = call(&["scan", "--max-ell", "5"]);
    assert_eq!(code, EXIT_PASS);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("ell0_times_2,n,ansatz,support0,support1,probs0,probs1,kl_verified"));
    assert_eq!(lines.next(), Some("9,1,counter_symmetric,-9/2;3/2,-3/2;9/2,1/4;3/4,3/4;1/4,true"));
    assert!(err.contains("9/2"));

    let (code, out, _) = call(&["scan", "--max-ell", "3"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(out.lines().count(), 1);
}

#[test]
fn output_is_identical_across_runs_and_jobs() {
    for args in [
        &["scan", "--n", "1", "--detect", "--max-ell", "4"][..],
        &["fuzz", "--n", "1", "--cases", "60", "--seed", "9"][..],
    ] {
        let (_, first, _) = call(args);
        let (_, again, _) = call(args);
        let mut parallel: Vec<&str> = args.to_vec();
        parallel.extend_from_slice(&["--jobs", "3"]);
        let (_, threaded, _) = call(&parallel);
        assert_eq!(first, again);
        assert_eq!(first, threaded);
    }
}

#[test]
fn engine_env_is_read_and_flag_wins() {
    let bin = env!("CARGO_BIN_EXE_aecode");
    let path = construct("env.json", &["symmetric", "--ell", "6", "--m1", "3", "--m2", "6"]);
    let engine_of = |extra: &[&str]| {
        let out = Command::new(bin)
            .env("AE_ENGINE", "float")
            .args(["verify", path.to_str().unwrap(), "--mode", "correct"])
            .args(extra)
            .output()
            .unwrap();
        assert!(out.status.success());
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v["checks"]["correction"]["engine"]["name"].as_str().unwrap().to_owned()
    };
    assert_eq!(engine_of(&[]), "float");
    assert_eq!(engine_of(&["--engine", "exact"]), "exact");
}

#[test]
fn props_passes_with_defaults() {
    let (code, out, _) = call(&["props", "--ell0", "6", "--n", "1", "--j-max", "4"]);
    assert_eq!(code, EXIT_PASS);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v.is_object());
}
