#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

/// Golden CSVs: file stem and the arguments that generate it (run from the crate root).
pub const GOLDEN: &[(&str, &[&str])] = &[
    (
        "ratio_hilbert_j1",
        &["ratio", "--pipeline", "@tests/fixtures/hilbert_j1.json", "--p", "4", "--samples", "200", "--seed", "42", "--both"],
    ),
    (
        "ratio_hilbert_j1_n50",
        &["ratio", "--pipeline", "@tests/fixtures/hilbert_j1.json", "--p", "4", "--samples", "50", "--seed", "42"],
    ),
    (
        "ratio_alpha_l2",
        &["ratio", "--pipeline", "@tests/fixtures/alpha_l2.json", "--p", "4", "--samples", "200", "--seed", "42", "--both"],
    ),
    (
        "ratio_riesz",
        &["ratio", "--pipeline", "@tests/fixtures/riesz.json", "--p", "4", "--samples", "200", "--seed", "42"],
    ),
    (
        "appendix_a",
        &["ratio", "--experiment", "appendix-a", "--p", "6", "--samples", "20", "--seed", "42"],
    ),
    ("cyclic_z3", &["ratio", "--experiment", "cyclic", "--samples", "100", "--seed", "42"]),
    ("bmo", &["ratio", "--experiment", "bmo", "--seed", "42"]),
    (
        "redform",
        &["fock", "--context", "tests/fixtures/diag3.json", "--experiment", r#"{"experiment":"redform"}"#, "--p", "4", "--samples", "100", "--seed", "42"],
    ),
    (
        "fock_letd",
        &["fock", "--context", "tests/fixtures/diag3.json", "--experiment", r#"{"experiment":"letd"}"#, "--samples", "50", "--seed", "42"],
    ),
    (
        "fock_modules",
        &["fock", "--context", "tests/fixtures/diag3.json", "--experiment", r#"{"experiment":"modules"}"#, "--samples", "30", "--seed", "42"],
    ),
    (
        "fock_swap",
        &["fock", "--context", "tests/fixtures/diag2.json", "--experiment", r#"{"experiment":"swap"}"#, "--samples", "30", "--seed", "42"],
    ),
    (
        "fock_ad",
        &["fock", "--context", "tests/fixtures/scalar3.json", "--experiment", r#"{"experiment":"ad"}"#, "--p", "2", "--samples", "30", "--seed", "42"],
    ),
];

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn golden_path(name: &str) -> PathBuf {
    root().join("tests/golden").join(format!("{name}.csv"))
}

pub fn golden_args(name: &str) -> &'static [&'static str] {
    GOLDEN.iter().find(|(n, _)| *n == name).expect("known golden case").1
}

pub fn freeharm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freeharm"))
        .args(args)
        .current_dir(root())
        .env_remove("FREEHARM_GUARD")
        .output()
        .expect("run freeharm")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// `# summary key: value` of a rendered CSV.
pub fn summary(csv: &str, key: &str) -> Option<String> {
    let prefix = format!("# summary {key}: ");
    csv.lines().find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
}

pub fn summary_f64(csv: &str, key: &str) -> Option<f64> {
    summary(csv, key)?.parse().ok()
}

/// Data rows of a rendered CSV as string cells, header row excluded.
pub fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}
