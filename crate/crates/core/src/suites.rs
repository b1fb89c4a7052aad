//! Seeded exact identity suites. Each trial draws its inputs from its own derived
//! seed, so reports are identical for any thread count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{random_element_with, random_homogeneous, AlgElement, RandomParams};
use crate::coeff::{Coeff, Phase, QC};
use crate::error::{Error, Guard, Result};
use crate::freeprod::element::{random_fp_element, FPRandomParams};
use crate::freeprod::maps::{
    fp_dagger, fp_dagger_combinatorial, fp_hilbert, fp_hilbert_d, fp_verify_cot1, fp_verify_cot2,
    random_b_unitary, random_h1_maps, swap_all, t_letter, t_pi,
};
use crate::freeprod::modules::{modular_bound_holds, module_col_norm, redform_rhs, ModuleDecomposition};
use crate::freeprod::{BaseKind, FPContext, FPElement, LetterMaps, Mat};
use crate::multipliers::{alpha_ld, hilbert_fh1, hilbert_j, verify_intertwining, PhaseFamily, SignFamily};
use crate::paraproducts::{
    bot, bot_oracle, branch, dagger, dagger_combinatorial, top, top_combinatorial, verify_cot1, verify_cot2,
    verify_rel1, verify_rel2, Branch, Dagger, ParaOps, PhaseRep, TopKind,
};
use crate::sampling::sample_rng;
use crate::symbols::{Scalar, SymbolZd};
use crate::words::{Alphabet, ReducedWord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Cotlar,
    Daggers,
    Top,
    Bot,
    Intertwine,
    Redform,
    Hprops,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Cotlar,
        Suite::Daggers,
        Suite::Top,
        Suite::Bot,
        Suite::Intertwine,
        Suite::Redform,
        Suite::Hprops,
    ];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Cotlar => "cotlar",
            Suite::Daggers => "daggers",
            Suite::Top => "top",
            Suite::Bot => "bot",
            Suite::Intertwine => "intertwine",
            Suite::Redform => "redform",
            Suite::Hprops => "hprops",
        };
        f.write_str(s)
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "suite",
                name: s.to_string(),
            })
    }
}

type GroupDagger = dyn Fn(&AlgElement<QC>, &AlgElement<QC>, Dagger) -> Result<AlgElement<QC>> + Send + Sync;

/// Run parameters. `dagger` replaces the daggers used on the right of (cot1); it exists
/// for negative controls.
#[derive(Clone)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    pub guard: Guard,
    pub dagger: Option<Arc<GroupDagger>>,
    /// Accepted interval for the redform ratio; `None` only checks two-sidedness.
    pub band: Option<(f64, f64)>,
}

impl SuiteConfig {
    pub fn new(trials: usize, seed: u64) -> SuiteConfig {
        SuiteConfig {
            trials,
            seed,
            guard: Guard::default(),
            dagger: None,
            band: None,
        }
    }
}

struct InjectedOps<'a>(&'a GroupDagger);

impl ParaOps<QC> for InjectedOps<'_> {
    fn dagger(&self, x: &AlgElement<QC>, y: &AlgElement<QC>, which: Dagger) -> Result<AlgElement<QC>> {
        (self.0)(x, y, which)
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Outcome {
    check: String,
    passed: bool,
    detail: String,
    value: Option<f64>,
}

#[derive(Default)]
struct Trial(Vec<Outcome>);

impl Trial {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl FnOnce() -> String) {
        let detail = if passed { String::new() } else { detail() };
        self.0.push(Outcome {
            check: name.into(),
            passed,
            detail,
            value: None,
        });
    }

    fn check_result(&mut self, name: &str, r: Result<bool>, detail: impl FnOnce() -> String) {
        match r {
            Ok(p) => self.check(name, p, detail),
            Err(e) => {
                let d = format!("{} (error: {e})", detail());
                self.check(name, false, || d)
            }
        }
    }

    fn record(&mut self, name: &str, value: f64, passed: bool) {
        self.0.push(Outcome {
            check: name.into(),
            passed,
            detail: if passed {
                String::new()
            } else {
                format!("value {value}")
            },
            value: Some(value),
        });
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Tally {
    pub check: String,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub check: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub tallies: Vec<Tally>,
    pub counterexamples: Vec<Counterexample>,
    /// Recorded per-trial values, e.g. redform ratios, as `(trial, check, value)`.
    pub values: Vec<(usize, String, f64)>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.tallies.iter().all(|t| t.failed == 0)
    }

    pub fn failures(&self) -> usize {
        self.tallies.iter().map(|t| t.failed).sum()
    }

    pub fn tally(&self, check: &str) -> Option<&Tally> {
        self.tallies.iter().find(|t| t.check == check)
    }

    /// Plain-text report; at most `max_examples` counterexamples are listed.
    pub fn render(&self, max_examples: usize) -> String {
        let mut s = format!(
            "suite {} seed {} trials {}: {}\n",
            self.suite,
            self.seed,
            self.trials,
            if self.passed() { "pass" } else { "FAIL" }
        );
        for t in &self.tallies {
            s += &format!("  {:<28} {:>6} passed {:>6} failed\n", t.check, t.passed, t.failed);
        }
        for c in self.counterexamples.iter().take(max_examples) {
            s += &format!("  counterexample [{}] trial {}: {}\n", c.check, c.trial, c.detail);
        }
        if self.counterexamples.len() > max_examples {
            s += &format!("  ... {} more counterexamples\n", self.counterexamples.len() - max_examples);
        }
        s
    }
}

fn group_params(num_terms: usize) -> RandomParams {
    RandomParams {
        alphabet: Alphabet::Free,
        num_gens: 3,
        max_block_len: 3,
        max_exp: 2,
        num_terms,
    }
}

fn fp_params() -> FPRandomParams {
    FPRandomParams {
        max_len: 3,
        num_terms: 3,
        include_base: true,
    }
}

/// Contexts shared by all trials of a run.
struct Contexts {
    diag: Arc<FPContext>,
    diag3: Arc<FPContext>,
    scalar: Arc<FPContext>,
    swap: Arc<FPContext>,
    swap_pi: LetterMaps,
}

impl Contexts {
    fn new() -> Result<Contexts> {
        let diag = FPContext::new(BaseKind::Diag, 2, &[2, 2])?;
        let swap = Arc::new(diag.swap_context()?);
        Ok(Contexts {
            diag: Arc::new(diag),
            diag3: Arc::new(FPContext::new(BaseKind::Diag, 2, &[2, 2, 2])?),
            scalar: Arc::new(FPContext::new(BaseKind::Scalar, 1, &[2, 2, 2])?),
            swap_pi: LetterMaps::swap(&swap)?,
            swap,
        })
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let ctxs = Contexts::new()?;
    let trials: Vec<Trial> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = sample_rng(cfg.seed, t as u64);
            let mut out = Trial::default();
            let r = match suite {
                Suite::Cotlar => cotlar_trial(&mut rng, cfg, &ctxs, &mut out),
                Suite::Daggers => daggers_trial(&mut rng, &ctxs, &mut out),
                Suite::Top => top_trial(&mut rng, &mut out),
                Suite::Bot => bot_trial(&mut rng, &mut out),
                Suite::Intertwine => intertwine_trial(&mut rng, &mut out),
                Suite::Redform => redform_trial(&mut rng, cfg, &ctxs, &mut out),
                Suite::Hprops => hprops_trial(&mut rng, cfg, &ctxs, &mut out),
            };
            if let Err(e) = r {
                out.check("trial-error", false, || e.to_string());
            }
            out
        })
        .collect();
    let mut tallies: Vec<Tally> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut counterexamples = Vec::new();
    let mut values = Vec::new();
    for (t, trial) in trials.into_iter().enumerate() {
        for o in trial.0 {
            let i = *index.entry(o.check.clone()).or_insert_with(|| {
                tallies.push(Tally {
                    check: o.check.clone(),
                    ..Tally::default()
                });
                tallies.len() - 1
            });
            if o.passed {
                tallies[i].passed += 1;
            } else {
                tallies[i].failed += 1;
                counterexamples.push(Counterexample {
                    trial: t,
                    check: o.check.clone(),
                    detail: o.detail,
                });
            }
            if let Some(v) = o.value {
                values.push((t, o.check, v));
            }
        }
    }
    Ok(SuiteReport {
        suite,
        seed: cfg.seed,
        trials: cfg.trials,
        tallies,
        counterexamples,
        values,
    })
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::LeftLonger => "l>n",
        Branch::RightLonger => "n>l",
        Branch::Equal => "l=n",
    }
}

/// A word `h` that cancels a random number of trailing blocks of `g`, then continues randomly.
fn cancelling_word<R: Rng + ?Sized>(rng: &mut R, g: &ReducedWord, params: &RandomParams) -> Result<ReducedWord> {
    let al = &params.alphabet;
    let c = rng.random_range(0..=g.block_len());
    let tail = al.word(g.suffix(c).iter().map(|b| (b.gen, b.exp)))?;
    let len = rng.random_range(0..=params.max_block_len);
    let single = RandomParams {
        num_terms: 1,
        ..params.clone()
    };
    let extra = random_homogeneous::<QC, _>(rng, &single, len)?;
    let r = extra.iter().next().map(|(w, _)| w.clone()).unwrap_or_default();
    Ok(al.concat(&al.invert(&tail), &r))
}

fn cotlar_trial<R: Rng + ?Sized>(rng: &mut R, cfg: &SuiteConfig, ctxs: &Contexts, out: &mut Trial) -> Result<()> {
    // short words are rare under the uniform word sampler; vary the cap so that
    // products with few blocks, where the projections bite, occur often
    let params = RandomParams {
        max_block_len: rng.random_range(1..=3),
        ..group_params(3)
    };
    let g: AlgElement<QC> = random_element_with(rng, &params)?;
    let h: AlgElement<QC> = random_element_with(rng, &params)?;
    let params = group_params(3);
    let pi = PhaseRep::random(rng, 4, params.num_gens);
    let show = |g: &AlgElement<QC>, h: &AlgElement<QC>| format!("g = {g}, h = {h}, π = {pi}");
    out.check_result("cot2[phase]", verify_cot2(&g, &h, &pi), || show(&g, &h));
    let cot1 = match &cfg.dagger {
        Some(f) => verify_cot1(&g, &h, &pi, &InjectedOps(f.as_ref())),
        None => verify_cot1(&g, &h, &pi, &crate::paraproducts::OracleOps),
    };
    out.check_result("cot1[phase]", cot1, || show(&g, &h));

    // relation identities on homogeneous inputs, cycling through the three branches
    let l = rng.random_range(1..=3usize);
    let n = match rng.random_range(0..3) {
        0 if l > 1 => rng.random_range(1..l),
        1 if l < 3 => rng.random_range(l + 1..=3),
        _ => l,
    };
    let gl: AlgElement<QC> = random_homogeneous(rng, &params, l)?;
    let hn: AlgElement<QC> = random_homogeneous(rng, &params, n)?;
    let name = format!("rel1[{}]", branch_name(branch(l, n)));
    out.check_result(&name, verify_rel1(&gl, &hn, &pi), || show(&gl, &hn));

    let gw = random_homogeneous::<QC, _>(rng, &RandomParams { num_terms: 1, ..params.clone() }, l)?
        .iter()
        .next()
        .map(|(w, _)| w.clone())
        .unwrap_or_default();
    let hw = cancelling_word(rng, &gw, &params)?;
    let name = format!("rel2[{}]", branch_name(branch(gw.block_len(), hw.block_len())));
    let zero = AlgElement::<QC>::zero(Alphabet::Free);
    out.check_result(&name, verify_rel2(&gw, &hw, &zero), || format!("g = {gw}, h = {hw}"));

    // swap representation on A^(1) *_B A^(2) with B = diag(M_2)
    let fg = random_fp_element(&ctxs.swap, rng, &fp_params());
    let fh = random_fp_element(&ctxs.swap, rng, &fp_params());
    let fshow = || format!("g = {fg}, h = {fh}");
    out.check_result("cot2[swap]", fp_verify_cot2(&fg, &fh, &ctxs.swap_pi), fshow);
    out.check_result("cot1[swap]", fp_verify_cot1(&fg, &fh, &ctxs.swap_pi, &fp_dagger), fshow);

    // Ad(u) representations over B = C
    let us = (0..3)
        .map(|_| random_b_unitary(&ctxs.scalar, 2, rng))
        .collect::<Result<Vec<Mat>>>()?;
    let ad = LetterMaps::ad(&ctxs.scalar, &us)?;
    let ag = random_fp_element(&ctxs.scalar, rng, &fp_params());
    let ah = random_fp_element(&ctxs.scalar, rng, &fp_params());
    let ashow = || format!("g = {ag}, h = {ah}, u = {us:?}");
    out.check_result("cot2[ad]", fp_verify_cot2(&ag, &ah, &ad), ashow);
    out.check_result("cot1[ad]", fp_verify_cot1(&ag, &ah, &ad, &fp_dagger), ashow);
    Ok(())
}

fn daggers_trial<R: Rng + ?Sized>(rng: &mut R, ctxs: &Contexts, out: &mut Trial) -> Result<()> {
    let params = group_params(3);
    let x: AlgElement<QC> = random_element_with(rng, &params)?;
    let y: AlgElement<QC> = random_element_with(rng, &params)?;
    let show = || format!("x = {x}, y = {y}");
    let mut total = AlgElement::zero(Alphabet::Free);
    for d in Dagger::ALL {
        let a = dagger(&x, &y, d)?;
        let b = dagger_combinatorial(&x, &y, d)?;
        out.check(format!("oracle=rule[{d}]"), a == b, show);
        total = &total + &a;
    }
    out.check("xy=sum", total == &x * &y, show);

    let fx = random_fp_element(&ctxs.diag3, rng, &fp_params());
    let fy = random_fp_element(&ctxs.diag3, rng, &fp_params());
    let fshow = || format!("x = {fx}, y = {fy}");
    let mut total = FPElement::zero(&ctxs.diag3);
    let mut agree = true;
    for d in Dagger::ALL {
        let a = fp_dagger(&fx, &fy, d)?;
        agree &= a == fp_dagger_combinatorial(&fx, &fy, d)?;
        total = total.add(&a);
    }
    out.check("oracle=rule[fp]", agree, fshow);
    out.check("xy=sum[fp]", total == fx.mul(&fy), fshow);
    Ok(())
}

fn top_trial<R: Rng + ?Sized>(rng: &mut R, out: &mut Trial) -> Result<()> {
    let params = group_params(3);
    let x: AlgElement<QC> = random_element_with(rng, &params)?;
    let x2: AlgElement<QC> = random_element_with(rng, &params)?;
    let y: AlgElement<QC> = random_element_with(rng, &params)?;
    let (j, k) = (rng.random_range(0..=2), rng.random_range(0..=2));
    let show = || format!("x = {x}, y = {y}, j = {j}, k = {k}");
    for (kind, name) in [
        (TopKind::Plain, "plain"),
        (TopKind::MarkFirst, "j+"),
        (TopKind::MarkLast, "k+"),
    ] {
        let a = top(&x, &y, j, k, kind)?;
        out.check(format!("oracle=rule[{name}]"), a == top_combinatorial(&x, &y, j, k, kind)?, show);
        let lin = top(&(&x + &x2), &y, j, k, kind)? == &a + &top(&x2, &y, j, k, kind)?;
        out.check(format!("bilinear[{name}]"), lin, show);
    }
    out.check("top00=xy", top(&x, &y, 0, 0, TopKind::Plain)? == &x * &y, show);
    Ok(())
}

fn bot_trial<R: Rng + ?Sized>(rng: &mut R, out: &mut Trial) -> Result<()> {
    let params = group_params(3);
    let d = rng.random_range(1..=3);
    let x: AlgElement<QC> = random_homogeneous(rng, &params, d)?;
    let y: AlgElement<QC> = random_element_with(rng, &params)?;
    let show = || format!("x = {x}, y = {y}, d = {d}");
    let mut total = AlgElement::zero(Alphabet::Free);
    let eps = SignFamily::random(rng, params.num_gens);
    let bound = x.l1_norm() * y.norm_2();
    for k in 0..=2 * d {
        let p = bot(&x, &y, k)?;
        out.check("oracle=projection", p == bot_oracle(&x, &y, k)?, show);
        out.check("l2-bound", p.norm_2() <= bound * (1.0 + 1e-12) + 1e-12, show);
        total = &total + &p;
        for j in 1..=d {
            let lhs = bot(&hilbert_j(&eps, j, &x), &y, k)?;
            if k <= 2 * (d - j) {
                let rhs = hilbert_j(&eps, j, &p);
                out.check("commute[k<=2(d-j)]", lhs == rhs, || format!("{} j = {j} k = {k}", show()));
            } else {
                let rhs = bot(&x, &hilbert_j(&eps, d + 1 - j, &y), k)?;
                out.check("commute[k>2(d-j)]", lhs == rhs, || format!("{} j = {j} k = {k}", show()));
            }
        }
    }
    out.check("xy=sum", total == &x * &y, show);
    Ok(())
}

fn intertwine_trial<R: Rng + ?Sized>(rng: &mut R, out: &mut Trial) -> Result<()> {
    let d = rng.random_range(1..=2usize);
    let params = group_params(4);
    let samples: Vec<Vec<Complex64>> = (0..3)
        .map(|_| {
            (0..d)
                .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
                .collect()
        })
        .collect();
    let j = rng.random_range(1..=d);
    let exact_symbols = [
        SymbolZd::sign_coordinate(d, j)?,
        SymbolZd::constant(d, Scalar::exact(QC::sample(rng)))?,
        SymbolZd::table(
            d,
            Scalar::from_i64(0),
            (0..3)
                .map(|_| {
                    let key = (0..d).map(|_| rng.random_range(-2..=2i64)).collect();
                    (key, Scalar::exact(QC::sample(rng)))
                })
                .collect(),
        )?,
    ];
    let x: AlgElement<QC> = random_element_with(rng, &params)?;
    for m in &exact_symbols {
        out.check_result("intertwining[exact]", verify_intertwining(m, &x, &samples), || {
            format!("x = {x}, d = {d}")
        });
    }
    let xf = x.to_float();
    out.check_result(
        "intertwining[riesz]",
        verify_intertwining(&SymbolZd::riesz(d, j)?, &xf, &samples),
        || format!("x = {x}, d = {d}, j = {j}"),
    );
    Ok(())
}

fn redform_trial<R: Rng + ?Sized>(rng: &mut R, cfg: &SuiteConfig, ctxs: &Contexts, out: &mut Trial) -> Result<()> {
    let x = random_fp_element(&ctxs.diag3, rng, &redform_params());
    let (lhs, rhs) = redform_ratio_parts(&x, &cfg.guard)?;
    let ratio = lhs / rhs;
    let mut ok = ratio.is_finite() && ratio > 0.0;
    if let Some((lo, hi)) = cfg.band {
        ok &= ratio >= lo && ratio <= hi;
    }
    out.record("ratio", ratio, ok);
    Ok(())
}

/// Sampling used by the redform experiment: words up to length 4, four terms.
pub fn redform_params() -> FPRandomParams {
    FPRandomParams {
        max_len: 4,
        num_terms: 4,
        include_base: true,
    }
}

/// `(‖x‖_4, ‖x_0‖_4 + ‖x_1‖_4 + ‖z‖_col + ‖z‖_row)`.
pub fn redform_ratio_parts(x: &FPElement, guard: &Guard) -> Result<(f64, f64)> {
    let lhs = x.norm_2k(2, guard)?;
    let rhs = redform_rhs(x, 2, guard)?.sum();
    Ok((lhs, rhs))
}

fn hprops_trial<R: Rng + ?Sized>(rng: &mut R, cfg: &SuiteConfig, ctxs: &Contexts, out: &mut Trial) -> Result<()> {
    let params = group_params(4);
    let x: AlgElement<QC> = random_element_with(rng, &params)?;
    let show = || format!("x = {x}");
    let n2 = x.norm2_sq();
    let eps = SignFamily::random_levels(rng, params.num_gens, 3);
    let h = hilbert_fh1(&eps, &x);
    out.check("isometry[H]", h.norm2_sq() == n2, show);
    out.check("involution[H]", hilbert_fh1(&eps, &h) == x, show);
    let j = rng.random_range(1..=3);
    out.check("isometry[H^(j)]", hilbert_j(&eps, j, &x).norm2_sq() == n2, show);
    let z = PhaseFamily::random_roots(rng, 4, 2, params.num_gens);
    out.check_result("isometry[alpha^L2]", alpha_ld(&z, 2, &x).map(|y| y.norm2_sq() == n2), show);

    // matrix contexts
    let ctx = &ctxs.diag3;
    let fx = random_fp_element(ctx, rng, &fp_params());
    let fy = random_fp_element(ctx, rng, &fp_params());
    let fz = random_fp_element(ctx, rng, &fp_params());
    let fshow = || format!("x = {fx}, y = {fy}, z = {fz}");
    out.check("fp-assoc", fx.mul(&fy).mul(&fz) == fx.mul(&fy.mul(&fz)), fshow);
    out.check("fp-tracial", fx.mul(&fy).trace() == fy.mul(&fx).trace(), fshow);
    out.check(
        "fp-grading",
        (0..=3).all(|m| (0..=3).all(|n| m == n || fx.project_len(m).inner(&fy.project_len(n)).map_or(false, |v| v.is_zero()))),
        fshow,
    );
    let feps = SignFamily::random_levels(rng, ctx.num_groups() as u32, 3);
    let fn2 = fx.norm2_sq();
    out.check("isometry[fp H]", fp_hilbert(&feps, &fx).norm2_sq() == fn2, fshow);
    out.check("isometry[fp H^(j)]", fp_hilbert_d(&feps, j, &fx).norm2_sq() == fn2, fshow);

    let us = (0..3)
        .map(|_| random_b_unitary(&ctxs.scalar, 2, rng))
        .collect::<Result<Vec<Mat>>>()?;
    let ad = LetterMaps::ad(&ctxs.scalar, &us)?;
    let ax = random_fp_element(&ctxs.scalar, rng, &fp_params());
    let tx = t_pi(&ad, &ax)?;
    out.check("isometry[T_pi Ad(u)]", tx.norm2_sq() == ax.norm2_sq(), || format!("x = {ax}, u = {us:?}"));
    out.check(
        "T_pi commutes with P_n",
        (0..=3).all(|n| t_pi(&ad, &ax.project_len(n)).is_ok_and(|y| y == tx.project_len(n))),
        || format!("x = {ax}"),
    );

    // swap: involutive, and copies keep moments
    let sx = random_fp_element(&ctxs.swap, rng, &fp_params());
    out.check_result(
        "swap^2=id",
        swap_all(&ctxs.swap_pi, &sx).and_then(|y| swap_all(&ctxs.swap_pi, &y)).map(|y| y == sx),
        || format!("x = {sx}"),
    );
    let bx = random_fp_element(&ctxs.diag, rng, &fp_params());
    let copy = bx.relabel(&ctxs.swap, |i| 2 * i);
    out.check_result(
        "copy-isometry",
        bx.moment_2k(2, &cfg.guard).and_then(|a| Ok(a == copy.moment_2k(2, &cfg.guard)?)),
        || format!("x = {bx}"),
    );

    // (H1) maps: modular bound, module bound, L_2 contraction, modular norm = L_2 norm
    for fctx in [&ctxs.diag3, &ctxs.scalar] {
        let t = random_h1_maps(fctx, rng)?;
        let cb2 = t.cb2();
        let norm = t.modular_norm();
        out.check("l2norm=modular", (norm - cb2).abs() <= 1e-9 * (1.0 + cb2), || format!("cb2 {cb2} modular {norm}"));
        let alg = rng.random_range(0..fctx.num_algebras());
        let n = fctx.algebra(alg).dim();
        let mut a = Mat::zero(n);
        for p in 0..n {
            for q in 0..n {
                a.set(p, q, QC::sample(rng));
            }
        }
        out.check("modular-bound", modular_bound_holds(&t, alg, &a, norm, 1e-9), || format!("a = {a:?}"));
        let x = random_fp_element(fctx, rng, &fp_params());
        let tx = t_letter(1, &t, &x)?;
        let (a2, b2) = (tx.norm2_sq().to_c64().re.sqrt(), x.norm2_sq().to_c64().re.sqrt());
        out.check("T^(1) l2-contraction", a2 <= cb2 * b2 * (1.0 + 1e-9) + 1e-12, || format!("x = {x}"));
        let zd = ModuleDecomposition::decompose(&x);
        let lhs = module_col_norm(&zd.map_letters(&t)?, 2, &cfg.guard)?;
        let rhs = norm * module_col_norm(&zd, 2, &cfg.guard)?;
        out.check("2cb-module", lhs <= rhs * (1.0 + 1e-9) + 1e-9, || format!("x = {x}: {lhs} > {rhs}"));
    }
    Ok(())
}

/// `||x||` ratios through the free-group phase maps use exact roots; this is the identity `1`.
pub fn unit_phase() -> Phase {
    Phase::ONE
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_small() {
        for s in Suite::ALL {
            let r = run_suite(s, &SuiteConfig::new(6, 1)).unwrap();
            assert!(r.passed(), "{}", r.render(5));
        }
    }

    #[test]
    fn corrupted_dagger_is_caught() {
        let mut cfg = SuiteConfig::new(30, 2);
        cfg.dagger = Some(Arc::new(|x: &AlgElement<QC>, y: &AlgElement<QC>, d: Dagger| {
            // drop the two-sided part
            match d {
                Dagger::D11 => Ok(AlgElement::zero(Alphabet::Free)),
                _ => dagger(x, y, d),
            }
        }));
        let r = run_suite(Suite::Cotlar, &cfg).unwrap();
        assert!(!r.passed());
        assert!(r.tally("cot1[phase]").unwrap().failed > 0);
        assert!(r.render(1).contains("counterexample [cot1[phase]]"));
    }

    #[test]
    fn suite_names() {
        for s in Suite::ALL {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }
}
