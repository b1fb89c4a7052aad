//! Acceptance suite: one PASS/FAIL line per criterion. Runs with `harness = false`.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{freeharm, golden_args, golden_path, rows, stdout, summary, summary_f64};
use freeharm_core::coeff::qc_real;
use freeharm_core::experiments::{is_monotone, semigroup_error};
use freeharm_core::suites::{run_suite, Suite, SuiteConfig};
use freeharm_core::symbols::{HmOptions, Scalar, ShellSigns, SignPattern, SymbolZd};
use freeharm_core::{AlgElement, Alphabet, Guard, OpNormParams, QC};

const SUITE_TRIALS: usize = 500;
const SUITE_BUDGET: Duration = Duration::from_secs(300);
const ISOMETRY_TRIALS: usize = 200;
const ROOT_TOL: f64 = 1e-9;
const HM_BUDGET: Duration = Duration::from_secs(30);
const GOLDEN_TOL: f64 = 1e-9;
const SEMIGROUP_TOL: f64 = 1e-12;
const BMO_TOL: f64 = 1e-3;
const SEED: u64 = 20240601;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg.into()) }
}

fn c1_identity_suites() -> Outcome {
    let start = Instant::now();
    let suites = [Suite::Cotlar, Suite::Daggers, Suite::Top, Suite::Bot, Suite::Intertwine];
    let mut checks = 0;
    for suite in suites {
        let report = run_suite(suite, &SuiteConfig::new(SUITE_TRIALS, SEED)).map_err(|e| e.to_string())?;
        check(report.passed(), format!("{suite}: {} failures\n{}", report.failures(), report.render(3)))?;
        for t in &report.tallies {
            check(t.passed > 0, format!("{suite}: branch {} never exercised", t.check))?;
        }
        if suite == Suite::Cotlar {
            for rule in ["rel1", "rel2"] {
                for branch in ["l>n", "n>l", "l=n"] {
                    let name = format!("{rule}[{branch}]");
                    check(report.tally(&name).is_some(), format!("no tally {name}"))?;
                }
            }
        }
        checks += report.tallies.len();
    }
    let elapsed = start.elapsed();
    check(elapsed < SUITE_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!("{} suites x {SUITE_TRIALS} trials, {checks} checks, 0 failures, {:.1}s", suites.len(), elapsed.as_secs_f64()))
}

fn c2_isometries() -> Outcome {
    let report = run_suite(Suite::Hprops, &SuiteConfig::new(ISOMETRY_TRIALS, SEED)).map_err(|e| e.to_string())?;
    let names = ["isometry[H]", "isometry[H^(j)]", "isometry[alpha^L2]", "isometry[T_pi Ad(u)]"];
    for name in names {
        let t = report.tally(name).ok_or(format!("no tally {name}"))?;
        check(t.failed == 0 && t.passed >= ISOMETRY_TRIALS, format!("{name}: {} passed, {} failed", t.passed, t.failed))?;
    }
    Ok(format!("{} maps exact on {ISOMETRY_TRIALS} elements each", names.len()))
}

/// Counts words in `{g1, g2}` (as `x* x x* x`) that reduce to the identity.
fn brute_force_fourth_moment() -> usize {
    let mut count = 0;
    for choice in 0..16u32 {
        let letters: Vec<i32> = (0..4)
            .map(|i| {
                let g = 1 + ((choice >> i) & 1) as i32;
                if i % 2 == 0 { -g } else { g }
            })
            .collect();
        let mut stack: Vec<i32> = Vec::new();
        for l in letters {
            if stack.last() == Some(&-l) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        count += stack.is_empty() as usize;
    }
    count
}

fn binomial(n: u64, k: u64) -> i64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1)) as i64
}

fn c3_derived_values() -> Outcome {
    let oracle = brute_force_fourth_moment();
    check(oracle == 6, format!("brute force gave {oracle}"))?;

    let al = Alphabet::Free;
    let guard = Guard::default();
    let g1 = al.generator(1, 1).unwrap();
    let g2 = al.generator(2, 1).unwrap();
    let x = AlgElement::<QC>::basis(al.clone(), g1.clone())
        .try_add(&AlgElement::basis(al.clone(), g2))
        .unwrap();
    let m = x.moment_2k(2, &guard).map_err(|e| e.to_string())?;
    check(m == qc_real(oracle as i64), format!("moment {m} != {oracle}"))?;

    let y = AlgElement::<QC>::one(al.clone()).try_add(&AlgElement::basis(al.clone(), g1.clone())).unwrap();
    for k in 1..=6 {
        let m = y.moment_2k(k, &guard).map_err(|e| e.to_string())?;
        check(m == qc_real(binomial(2 * k as u64, k as u64)), format!("k = {k}: moment {m}"))?;
    }

    let z = AlgElement::<QC>::basis(al.clone(), g1)
        .try_add(&AlgElement::basis(al.clone(), al.generator(1, -1).unwrap()))
        .unwrap();
    let params = OpNormParams { k_max: 12, ..OpNormParams::default() };
    let b = z.to_float().opnorm_bracket(&params, &guard).map_err(|e| e.to_string())?;
    check(
        b.lower >= 1.85 && b.lower <= 2.0 + ROOT_TOL && b.upper >= 2.0 - ROOT_TOL,
        format!("bracket [{}, {}]", b.lower, b.upper),
    )?;
    Ok(format!("oracle 6, C(2k,k) for k <= 6, bracket [{:.4}, {}]", b.lower, b.upper))
}

fn c4_hm_norms() -> Outcome {
    let start = Instant::now();
    let opts = HmOptions::default();
    let c = SymbolZd::constant(2, Scalar::from_i64(-3)).unwrap();
    let v = c.hm_norm(64, &opts).map_err(|e| e.to_string())?.value;
    check(v == 3.0, format!("constant -3 gave {v}"))?;

    for (name, sym) in [
        ("sign", SymbolZd::sign_coordinate(1, 1).unwrap()),
        ("riesz", SymbolZd::riesz(1, 1).unwrap()),
    ] {
        let small = sym.hm_norm(1 << 8, &opts).map_err(|e| e.to_string())?;
        let large = sym.hm_norm(1 << 12, &opts).map_err(|e| e.to_string())?;
        check(
            (small.value - 1.0).abs() < ROOT_TOL && (large.value - 1.0).abs() < ROOT_TOL && !large.boundary_flag,
            format!("{name}: {} at 2^8, {} at 2^12, flag {}", small.value, large.value, large.boundary_flag),
        )?;
    }

    let lp = SymbolZd::lp_radial(1, ShellSigns::Pattern(SignPattern::Alternating)).unwrap();
    let r = lp.hm_norm(1 << 10, &opts).map_err(|e| e.to_string())?;
    check(r.boundary_flag, "lp_radial boundary flag not raised")?;
    let elapsed = start.elapsed();
    check(elapsed < HM_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!("constant 3, sign/riesz 1 at 2^8 and 2^12, lp_radial flagged, {:.2}s", elapsed.as_secs_f64()))
}

/// Reruns a golden case and requires byte identity.
fn rerun_golden(name: &str) -> Result<String, String> {
    let out = freeharm(golden_args(name));
    check(out.status.success(), format!("{name}: {}", String::from_utf8_lossy(&out.stderr)))?;
    let expected = fs::read_to_string(golden_path(name)).map_err(|e| format!("{name}: {e}"))?;
    let got = stdout(&out);
    check(got == expected, format!("{name}: output differs from golden"))?;
    Ok(got)
}

fn c5_redform() -> Outcome {
    let csv = rerun_golden("redform")?;
    check(csv.contains("# note:") && csv.contains("regression contract"), "header note missing")?;
    check(summary(&csv, "two_sided").as_deref() == Some("true"), "band not two-sided")?;
    let col = csv.lines().find(|l| !l.starts_with('#')).unwrap().split(',').position(|c| c == "ratio").unwrap();
    let ratios: Vec<f64> = rows(&csv).iter().map(|r| r[col].parse().unwrap()).collect();
    check(ratios.len() == 100, format!("{} samples", ratios.len()))?;
    check(ratios.iter().all(|r| r.is_finite() && *r > 0.0), "ratio 0 or infinite")?;
    Ok(format!(
        "byte-identical, band [{}, {}]",
        summary(&csv, "band_min").unwrap(),
        summary(&csv, "band_max").unwrap()
    ))
}

fn c6_ratio_goldens() -> Outcome {
    let mut parts = Vec::new();
    for (name, invertible) in [("ratio_hilbert_j1", true), ("ratio_alpha_l2", true), ("ratio_riesz", false)] {
        let expected = fs::read_to_string(golden_path(name)).map_err(|e| format!("{name}: {e}"))?;
        let out = stdout(&freeharm(golden_args(name)));
        check(rows(&out).len() == 200, format!("{name}: {} samples", rows(&out).len()))?;
        let keys: &[&str] = if invertible { &["max", "max_inv"] } else { &["max"] };
        for key in keys {
            let (want, got) = (summary_f64(&expected, key), summary_f64(&out, key));
            match (want, got) {
                (Some(w), Some(g)) if (w - g).abs() <= GOLDEN_TOL => {}
                _ => return Err(format!("{name} {key}: golden {want:?}, got {got:?}")),
            }
        }
        parts.push(format!("{name} max {}", summary(&out, "max").unwrap()));
    }
    Ok(parts.join(", "))
}

fn c7_poisson_bmo() -> Outcome {
    let err = semigroup_error(50, SEED, &[(0.1, 0.2), (0.5, 1.5), (2.0, 3.0)]).map_err(|e| e.to_string())?;
    check(err < SEMIGROUP_TOL, format!("semigroup error {err}"))?;
    let csv = stdout(&freeharm(&["ratio", "--experiment", "bmo", "--seed", "1"]));
    let data = rows(&csv);
    let words: Vec<f64> = data.iter().filter(|r| r[0].starts_with("bmo_c")).map(|r| r[2].parse().unwrap()).collect();
    check(words.len() == 3, "missing bmo_c rows")?;
    check(words.iter().all(|v| (v - 1.0).abs() <= BMO_TOL), format!("bmo_c values {words:?}"))?;
    let trend: Vec<f64> = data.iter().filter(|r| r[0].starts_with("bmo_r")).map(|r| r[2].parse().unwrap()).collect();
    check(trend.len() == 8, "missing bmo_r rows")?;
    check(is_monotone(&trend, 0.0), format!("trend {trend:?}"))?;
    Ok(format!("semigroup error {err:e}, bmo_c within {BMO_TOL}, bmo_r nondecreasing over n = 1..8"))
}

fn c8_middle_hilbert() -> Outcome {
    let csv = rerun_golden("appendix_a")?;
    let data = rows(&csv);
    for d in ["2", "4", "8"] {
        check(data.iter().any(|r| r[0] == d), format!("no rows for d = {d}"))?;
        check(summary(&csv, &format!("max_ratio_d{d}")).is_some(), format!("no summary for d = {d}"))?;
    }
    Ok("byte-identical for d = 2, 4, 8".into())
}

fn c9_cyclic() -> Outcome {
    let csv = rerun_golden("cyclic_z3")?;
    check(summary(&csv, "d0_identity_exact").as_deref() == Some("true"), "d = 0 identity not exact")?;
    Ok(format!(
        "d = 0 exact, band [{}, {}] byte-identical",
        summary(&csv, "ratio_min").unwrap(),
        summary(&csv, "ratio_max").unwrap()
    ))
}

fn c10_determinism() -> Outcome {
    let cases: [&[&str]; 3] = [
        &["verify", "--suite", "cotlar", "--trials", "60", "--seed", "7"],
        &["verify", "--suite", "redform", "--trials", "20", "--seed", "7"],
        golden_args("ratio_alpha_l2"),
    ];
    for args in cases {
        let one = freeharm(&[args, &["--threads", "1"]].concat());
        let eight = freeharm(&[args, &["--threads", "8"]].concat());
        check(one.status.success(), format!("{}: failed", args[0]))?;
        check(one.stdout == eight.stdout, format!("{args:?}: outputs differ"))?;
    }
    Ok("verify and ratio identical at 1 and 8 threads".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("identity suites", c1_identity_suites),
        ("L2 isometries", c2_isometries),
        ("derived values", c3_derived_values),
        ("HM norms", c4_hm_norms),
        ("redform band", c5_redform),
        ("ratio goldens", c6_ratio_goldens),
        ("Poisson/BMO", c7_poisson_bmo),
        ("middle-block Hilbert", c8_middle_hilbert),
        ("cyclic Z_3", c9_cyclic),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
