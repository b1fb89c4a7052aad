mod common;

use std::fs;

use common::{freeharm, rows, stdout, summary};

fn code(args: &[&str]) -> i32 {
    freeharm(args).status.code().unwrap()
}

fn line_value(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
        .to_string()
}

#[test]
fn hm_norm_examples() {
    let out = stdout(&freeharm(&["hm-norm", "--symbol", r#"{"name":"constant","d":1,"c":1}"#, "--box", "100"]));
    assert_eq!(line_value(&out, "value"), "1");

    let out = stdout(&freeharm(&["hm-norm", "--symbol", r#"{"name":"riesz","d":1,"j":1}"#, "--box", "1024"]));
    assert_eq!(line_value(&out, "value"), "1");
    assert_eq!(line_value(&out, "boundary_flag"), "false");

    let out = stdout(&freeharm(&[
        "hm-norm",
        "--symbol",
        r#"{"name":"lp_radial","d":1,"eps":"alternating"}"#,
        "--box",
        "1024",
    ]));
    assert_eq!(line_value(&out, "boundary_flag"), "true");
    assert!(line_value(&out, "value").parse::<f64>().unwrap() > 100.0);
}

#[test]
fn apply_examples() {
    let fixture = fs::read_to_string(common::root().join("tests/fixtures/word.json")).unwrap();
    let out = freeharm(&["apply", "--input", "tests/fixtures/word.json", "--pipeline", r#"{"kind":"identity"}"#]);
    assert_eq!(stdout(&out), fixture);

    let out = stdout(&freeharm(&[
        "apply",
        "--input",
        "tests/fixtures/word.json",
        "--pipeline",
        r#"{"kind":"poisson","t":1}"#,
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let re = v["terms"][0]["re"].as_f64().unwrap();
    assert!((re - (-3.0f64).exp()).abs() < 1e-15);

    let out = stdout(&freeharm(&[
        "apply",
        "--input",
        "tests/fixtures/riesz_fixture.json",
        "--pipeline",
        r#"{"kind":"Mm","symbol":{"name":"riesz","d":2,"j":1}}"#,
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let re = v["terms"][0]["re"].as_f64().unwrap();
    assert!((re - 3.0 / 10f64.sqrt()).abs() < 1e-15);
}

#[test]
fn apply_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let p = path.to_str().unwrap();
    assert_eq!(code(&["apply", "--input", "tests/fixtures/word.json", "--pipeline", "[]", "--out", p]), 0);
    let fixture = fs::read_to_string(common::root().join("tests/fixtures/word.json")).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), fixture);
}

#[test]
fn norm_examples() {
    let out = stdout(&freeharm(&["norm", "--input", "tests/fixtures/g1_plus_g2.json", "--p", "4"]));
    assert_eq!(line_value(&out, "moment"), "6");
    let n: f64 = line_value(&out, "norm_4").parse().unwrap();
    assert!((n - 6f64.powf(0.25)).abs() < 1e-12);

    for p in ["2", "4", "10"] {
        let out = stdout(&freeharm(&["norm", "--input", "tests/fixtures/word.json", "--p", p]));
        assert_eq!(line_value(&out, &format!("norm_{p}")), "1");
    }

    let out = stdout(&freeharm(&["norm", "--input", "tests/fixtures/g1_plus_inverse.json", "--opnorm"]));
    let lower: f64 = line_value(&out, "lower").parse().unwrap();
    let upper: f64 = line_value(&out, "upper").parse().unwrap();
    assert!(lower >= 1.85 && lower <= 2.0 && upper >= 2.0 - 1e-12, "{out}");
}

#[test]
fn identity_ratio_is_one() {
    let out = stdout(&freeharm(&["ratio", "--pipeline", r#"{"kind":"identity"}"#, "--samples", "20", "--seed", "5"]));
    assert!(out.starts_with("# tool: freeharm"));
    assert!(rows(&out).iter().all(|r| r[3] == "1"));
    assert_eq!(summary(&out, "max").unwrap(), "1");
}

#[test]
fn verify_reports_and_exit_codes() {
    let out = freeharm(&["verify", "--suite", "cotlar", "--trials", "20", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("suite cotlar seed 3 trials 20: pass"));

    let out = stdout(&freeharm(&["verify", "--suite", "redform", "--trials", "5", "--seed", "3"]));
    assert_eq!(out.matches("ratio trial").count(), 5);

    // a band nothing can satisfy turns every trial into a failure
    let out = freeharm(&["verify", "--suite", "redform", "--trials", "3", "--seed", "3", "--band", "5,6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("counterexample [ratio]"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&["hm-norm", "--symbol", r#"{"name":"nope","d":1}"#, "--box", "10"]), 2);
    assert_eq!(code(&["verify", "--suite", "nope", "--seed", "1"]), 2);
    assert_eq!(code(&["verify", "--suite", "cotlar"]), 2);
    assert_eq!(code(&["norm", "--input", "tests/fixtures/word.json", "--p", "3"]), 2);
    assert_eq!(code(&["norm", "--input", "missing.json", "--p", "4"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["verify", "--suite", "redform", "--seed", "1", "--band", "0.5"]), 2);
}

#[test]
fn resource_guard_exits_3() {
    let args = ["norm", "--input", "tests/fixtures/g1_plus_g2.json", "--p", "20", "--guard-terms", "2"];
    assert_eq!(code(&args), 3);
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_freeharm"))
        .args(&args[..5])
        .current_dir(common::root())
        .env("FREEHARM_GUARD", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn fock_identity_and_ad() {
    let out = stdout(&freeharm(&[
        "fock",
        "--context",
        "tests/fixtures/diag3.json",
        "--experiment",
        r#"{"experiment":"identity"}"#,
        "--samples",
        "10",
        "--seed",
        "1",
    ]));
    assert_eq!(summary(&out, "all_one").unwrap(), "true");
    let out = stdout(&freeharm(&[
        "fock",
        "--context",
        "tests/fixtures/scalar3.json",
        "--experiment",
        r#"{"experiment":"ad"}"#,
        "--samples",
        "10",
        "--seed",
        "1",
    ]));
    assert_eq!(summary(&out, "all_exact").unwrap(), "true");
    assert!(rows(&out).iter().all(|r| r[3] == "1"));
}

#[test]
fn threads_do_not_change_output() {
    let base = ["ratio", "--pipeline", "@tests/fixtures/alpha_l2.json", "--samples", "30", "--seed", "9", "--both"];
    let one = freeharm(&[&base[..], &["--threads", "1"]].concat());
    let many = freeharm(&[&base[..], &["--threads", "8"]].concat());
    assert_eq!(one.stdout, many.stdout);
}
