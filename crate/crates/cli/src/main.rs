use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use freeharm_core::experiments::{
    appendix_a_experiment, bmo_experiment, cyclic_experiment, fock_experiment, fock_params, parse_alphabet,
    ratio_experiment, AppendixConfig, BmoConfig, Csv, CyclicConfig, FockConfig, FockExperiment, RatioConfig,
};
use freeharm_core::freeprod::FPContext;
use freeharm_core::io::AnyElement;
use freeharm_core::multipliers::Pipeline;
use freeharm_core::suites::{run_suite, Suite, SuiteConfig};
use freeharm_core::symbols::{HmOptions, Modulus, SymbolZd};
use freeharm_core::{Error, Guard, OpNormParams, RandomParams};

#[derive(Parser)]
#[command(name = "freeharm", version, about = "Fourier multipliers, free Hilbert transforms and paraproducts on free groups")]
struct Cli {
    /// Seed for randomized commands (ratio, verify, fock).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cap on term products per multiplication.
    #[arg(long, global = true, env = "FREEHARM_GUARD")]
    guard_terms: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Hörmander-Mikhlin norm of a symbol on a box.
    HmNorm(HmNormArgs),
    /// Apply a multiplier pipeline to an element file.
    Apply(ApplyArgs),
    /// L_p norm or operator-norm bracket of an element file.
    Norm(NormArgs),
    /// Seeded ratio experiments, written as CSV.
    Ratio(RatioArgs),
    /// Exact identity suites.
    Verify(VerifyArgs),
    /// Free-product experiments over a context file, written as CSV.
    Fock(FockArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModulusArg {
    Euclidean,
    L1,
}

#[derive(Args)]
struct HmNormArgs {
    /// Symbol JSON, inline or `@file`.
    #[arg(long)]
    symbol: String,
    /// Half-width `B` of the box `[-B, B]^d`.
    #[arg(long = "box")]
    box_radius: u64,
    #[arg(long, value_enum, default_value = "euclidean")]
    modulus: ModulusArg,
    /// Backward instead of forward differences.
    #[arg(long)]
    backward: bool,
}

#[derive(Args)]
struct ApplyArgs {
    #[arg(long)]
    input: PathBuf,
    /// Pipeline JSON, inline or `@file`.
    #[arg(long)]
    pipeline: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long)]
    input: PathBuf,
    /// Even exponent `p = 2k`.
    #[arg(long, conflicts_with = "opnorm")]
    p: Option<usize>,
    #[arg(long)]
    opnorm: bool,
    #[arg(long, default_value_t = 12)]
    k_max: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum RatioExperiment {
    Pipeline,
    AppendixA,
    Bmo,
    Cyclic,
}

#[derive(Args)]
struct RatioArgs {
    #[arg(long, value_enum, default_value = "pipeline")]
    experiment: RatioExperiment,
    /// Pipeline JSON, inline or `@file` (pipeline experiment).
    #[arg(long)]
    pipeline: Option<String>,
    #[arg(long, default_value_t = 4)]
    p: usize,
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Also record the inverse pipeline.
    #[arg(long)]
    both: bool,
    #[arg(long, default_value = "free")]
    alphabet: String,
    #[arg(long, default_value_t = 2)]
    gens: u32,
    #[arg(long, default_value_t = 2)]
    max_blocks: usize,
    #[arg(long, default_value_t = 1)]
    max_exp: i64,
    #[arg(long, default_value_t = 8)]
    terms: usize,
    /// Degrees for the appendix-a experiment.
    #[arg(long, value_delimiter = ',', default_values_t = [2, 4, 8])]
    degrees: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Accepted redform ratio interval `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    band: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10)]
    max_examples: usize,
}

#[derive(Args)]
struct FockArgs {
    /// Context JSON file.
    #[arg(long)]
    context: PathBuf,
    /// Experiment JSON, inline or `@file`, e.g. `{"experiment":"redform"}`.
    #[arg(long)]
    experiment: String,
    #[arg(long, default_value_t = 4)]
    p: usize,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Verification,
    Core(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Core(e)
    }
}

type CmdResult = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Inline JSON, or the contents of `file` for `@file`.
fn inline_or_file(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(p) => read_text(Path::new(p)),
        None => Ok(arg.to_string()),
    }
}

fn write_out(out: &Option<PathBuf>, text: &str) -> CmdResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn half_p(p: usize) -> Result<usize, Failure> {
    if p == 0 || p % 2 != 0 {
        return Err(Failure::Usage(format!("--p must be a positive even integer, got {p}")));
    }
    Ok(p / 2)
}

fn need_seed(seed: Option<u64>) -> Result<u64, Failure> {
    seed.ok_or_else(|| Failure::Usage("--seed is required for randomized commands".into()))
}

/// Header lines naming the tool and the generating command; `--threads` and `--out`
/// are dropped so the output depends only on what determines it.
fn preamble() -> Vec<(String, String)> {
    let mut args = Vec::new();
    let mut skip = false;
    for a in std::env::args().skip(1) {
        if skip {
            skip = false;
            continue;
        }
        if a == "--threads" || a == "--out" {
            skip = true;
            continue;
        }
        if a.starts_with("--threads=") || a.starts_with("--out=") {
            continue;
        }
        args.push(if a.contains(' ') { format!("'{a}'") } else { a });
    }
    vec![
        ("tool".into(), format!("freeharm {}", env!("CARGO_PKG_VERSION"))),
        ("command".into(), format!("freeharm {}", args.join(" "))),
    ]
}

fn emit_csv(csv: Csv, out: &Option<PathBuf>) -> CmdResult {
    write_out(out, &csv.with_preamble(preamble()).render())
}

fn hm_norm(a: &HmNormArgs) -> CmdResult {
    let symbol: SymbolZd = serde_json::from_str(&inline_or_file(&a.symbol)?).map_err(Error::from)?;
    let opts = HmOptions {
        modulus: match a.modulus {
            ModulusArg::Euclidean => Modulus::Euclidean,
            ModulusArg::L1 => Modulus::L1,
        },
        backward: a.backward,
    };
    let r = symbol.hm_norm(a.box_radius, &opts)?;
    println!("value: {}", r.value);
    println!("attained: alpha={:?} k={:?}", r.alpha, r.k);
    println!("boundary_flag: {}", r.boundary_flag);
    Ok(())
}

fn apply(a: &ApplyArgs) -> CmdResult {
    let x = AnyElement::from_json(&read_text(&a.input)?)?;
    let p = Pipeline::from_json(&inline_or_file(&a.pipeline)?)?;
    write_out(&a.out, &x.apply(&p)?.to_json()?)
}

fn norm(a: &NormArgs, guard: &Guard) -> CmdResult {
    let x = AnyElement::from_json(&read_text(&a.input)?)?;
    if a.opnorm {
        let params = OpNormParams {
            k_max: a.k_max,
            ..OpNormParams::default()
        };
        let b = x.opnorm_bracket(&params, guard)?;
        println!("lower: {}", b.lower);
        println!("upper: {}", b.upper);
        println!("moment_lower: {} (k = {})", b.moment_lower, b.moment_k_reached);
        println!("ball_lower: {}", b.ball_lower);
        return Ok(());
    }
    let Some(p) = a.p else {
        return Err(Failure::Usage("norm needs --p 2k or --opnorm".into()));
    };
    let k = half_p(p)?;
    println!("moment: {}", x.moment_text(k, guard)?);
    println!("norm_{p}: {}", x.norm_2k(k, guard)?);
    Ok(())
}

fn ratio(a: &RatioArgs, seed: u64, guard: &Guard) -> CmdResult {
    let k = half_p(a.p)?;
    let params = RandomParams {
        alphabet: parse_alphabet(&a.alphabet)?,
        num_gens: a.gens,
        max_block_len: a.max_blocks,
        max_exp: a.max_exp,
        num_terms: a.terms,
    };
    let csv = match a.experiment {
        RatioExperiment::Pipeline => {
            let Some(p) = &a.pipeline else {
                return Err(Failure::Usage("the pipeline experiment needs --pipeline".into()));
            };
            ratio_experiment(&RatioConfig {
                pipeline: Pipeline::from_json(&inline_or_file(p)?)?,
                params,
                k,
                samples: a.samples,
                seed,
                guard: guard.clone(),
                both: a.both,
            })?
        }
        RatioExperiment::AppendixA => {
            let mut cfg = AppendixConfig::new(a.samples, seed);
            cfg.degrees = a.degrees.clone();
            cfg.k = k;
            cfg.guard = guard.clone();
            appendix_a_experiment(&cfg)?
        }
        RatioExperiment::Bmo => bmo_experiment(&BmoConfig {
            guard: guard.clone(),
            ..BmoConfig::default()
        })?,
        RatioExperiment::Cyclic => {
            let mut cfg = CyclicConfig::new(a.samples, seed);
            cfg.k = k;
            cfg.guard = guard.clone();
            cyclic_experiment(&cfg)?
        }
    };
    emit_csv(csv, &a.out)
}

fn verify(a: &VerifyArgs, seed: u64, guard: &Guard) -> CmdResult {
    let suite: Suite = a.suite.parse()?;
    let mut cfg = SuiteConfig::new(a.trials, seed);
    cfg.guard = guard.clone();
    cfg.band = match a.band.as_deref() {
        None => None,
        Some(&[lo, hi]) if lo <= hi => Some((lo, hi)),
        Some(_) => return Err(Failure::Usage("--band takes lo,hi with lo <= hi".into())),
    };
    let report = run_suite(suite, &cfg)?;
    print!("{}", report.render(a.max_examples));
    if suite == Suite::Redform {
        for (t, _, v) in &report.values {
            println!("  ratio trial {t}: {v}");
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn fock(a: &FockArgs, seed: u64, guard: &Guard) -> CmdResult {
    let ctx = Arc::new(FPContext::from_json(&read_text(&a.context)?)?);
    let experiment: FockExperiment = serde_json::from_str(&inline_or_file(&a.experiment)?).map_err(Error::from)?;
    let cfg = FockConfig {
        params: fock_params(&experiment),
        experiment,
        k: half_p(a.p)?,
        samples: a.samples,
        seed,
        guard: guard.clone(),
    };
    emit_csv(fock_experiment(&ctx, &cfg)?, &a.out)
}

fn run(cli: &Cli) -> CmdResult {
    let guard = cli.guard_terms.map(Guard::new).unwrap_or_default();
    match &cli.cmd {
        Cmd::HmNorm(a) => hm_norm(a),
        Cmd::Apply(a) => apply(a),
        Cmd::Norm(a) => norm(a, &guard),
        Cmd::Ratio(a) => ratio(a, need_seed(cli.seed)?, &guard),
        Cmd::Verify(a) => verify(a, need_seed(cli.seed)?, &guard),
        Cmd::Fock(a) => fock(a, need_seed(cli.seed)?, &guard),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Resource { .. }) { 3 } else { 2 })
        }
    }
}
