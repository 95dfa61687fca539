//! Command-line front end: problem generation, solver runs (single or
//! side-by-side), precision-constraint reports, and the cost-model grid,
//! all emitting figure-ready CSV/JSON.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, bad parameters,
//! unreadable inputs), 2 for numerical failures (non-unique problems,
//! factorization breakdowns). Failures print a single JSON object to stderr.

use clap::{Args, Parser, Subcommand, ValueEnum};
use mptls::constraints::evaluate_uq_constraints;
use mptls::error::Error;
use mptls::io;
use mptls::oracle::tls_solve_exact;
use mptls::perf::{self, CostConstants};
use mptls::precision::FpFormat;
use mptls::problems::{self, TlsProblem};
use mptls::rqi::{
    rqi_pcgtls_mp, PrecisionConfig, PreconditionerKind, RqiOptions, RqiResult, StopRule,
};
use mptls::Matrix;
use serde::Deserialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mptls",
    version,
    about = "Mixed-precision Rayleigh quotient iteration for total least squares"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a problem instance and write matrix, right-hand side, and a
    /// JSON sidecar.
    Generate(GenerateArgs),
    /// Run the solver on a problem and write a trace CSV plus a JSON summary.
    Solve(SolveArgs),
    /// Run two configurations on one problem and emit a long-format CSV.
    Compare(CompareArgs),
    /// Evaluate the factorization-precision bounds and recommend a format.
    Constraints(ConstraintsArgs),
    /// Evaluate the modeled mixed-precision speedup over an (m, n) grid.
    Perf(PerfArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecondArg {
    Qr,
    Cholesky,
}

impl From<PrecondArg> for PreconditionerKind {
    fn from(p: PrecondArg) -> Self {
        match p {
            PrecondArg::Qr => PreconditionerKind::Qr,
            PrecondArg::Cholesky => PreconditionerKind::Cholesky,
        }
    }
}

impl PrecondArg {
    fn as_str(self) -> &'static str {
        match self {
            PrecondArg::Qr => "qr",
            PrecondArg::Cholesky => "cholesky",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StopArg {
    Strict,
    Weak,
}

impl From<StopArg> for StopRule {
    fn from(s: StopArg) -> Self {
        match s {
            StopArg::Strict => StopRule::Strict,
            StopArg::Weak => StopRule::Weak,
        }
    }
}

impl StopArg {
    fn as_str(self) -> &'static str {
        match self {
            StopArg::Strict => "strict",
            StopArg::Weak => "weak",
        }
    }
}

fn parse_format(name: &str) -> Result<FpFormat, Error> {
    match name {
        "fp16" => Ok(FpFormat::fp16()),
        "fp32" => Ok(FpFormat::fp32()),
        "fp64" => Ok(FpFormat::fp64()),
        other => Err(Error::InvalidFormat(format!(
            "unknown format {other:?}; expected fp16, fp32, or fp64"
        ))),
    }
}

// ---------------------------------------------------------------------------
// generate

#[derive(Args)]
struct GenerateArgs {
    #[command(subcommand)]
    which: GenKind,
}

#[derive(Subcommand)]
enum GenKind {
    /// Random orthogonal-factor instance with noise on both A and b.
    Random {
        #[arg(long, default_value_t = 100)]
        m: usize,
        #[arg(long, default_value_t = 60)]
        n: usize,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output path prefix (writes <out>.A.txt, <out>.b.txt, <out>.json).
        #[arg(long, default_value = "random")]
        out: String,
    },
    /// 9x4 sparse-pattern instance with a delta-controlled singular gap.
    Delta {
        #[arg(long, default_value_t = 1e-2)]
        delta: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "delta")]
        out: String,
    },
    /// Geometric singular-value ladder instance (condition 2^(n-1) before
    /// perturbation).
    Bjorck {
        #[arg(long, default_value_t = 30)]
        m: usize,
        #[arg(long, default_value_t = 15)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "bjorck")]
        out: String,
    },
    /// Banded lower-triangular Toeplitz operator from a Gaussian pulse with a
    /// full-Toeplitz perturbation.
    Toeplitz {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        omega: usize,
        #[arg(long, default_value_t = 1.25)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-3)]
        scale: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "toeplitz")]
        out: String,
    },
    /// Fixed 4-column structured instance extended to n rows.
    Vanhuffel {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "vanhuffel")]
        out: String,
    },
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Error> {
    let (problem, out) = match args.which {
        GenKind::Random { m, n, eps, seed, out } => (problems::gen_random(m, n, eps, seed)?, out),
        GenKind::Delta { delta, eps, seed, out } => (problems::gen_delta(delta, eps, seed)?, out),
        GenKind::Bjorck { m, n, eps, seed, out } => (problems::gen_bjorck(m, n, eps, seed)?, out),
        GenKind::Toeplitz {
            n,
            omega,
            alpha,
            scale,
            seed,
            out,
        } => (problems::gen_toeplitz(n, omega, alpha, scale, seed)?, out),
        GenKind::Vanhuffel { n, eps, seed, out } => (problems::gen_vanhuffel(n, eps, seed)?, out),
    };
    let matrix_path = format!("{out}.A.txt");
    let rhs_path = format!("{out}.b.txt");
    let sidecar_path = format!("{out}.json");
    io::write_matrix(Path::new(&matrix_path), &problem.a)?;
    io::write_vector(Path::new(&rhs_path), &problem.b)?;

    let oracle = match tls_solve_exact(&problem.a, &problem.b) {
        Ok(sol) => json!({
            "sigma": sol.sigma,
            "sigma_sq": sol.sigma_sq,
            "condition_a": sol.sv_a[0] / sol.sv_a[sol.sv_a.len() - 1],
            "condition_tls": sol.condition_tls,
            "condition_frobenius": sol.condition_frobenius,
            "consistent": sol.consistent,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let sidecar = json!({
        "label": problem.label,
        "m": problem.a.rows(),
        "n": problem.a.cols(),
        "seed": problem.seed,
        "epsilon": problem.epsilon,
        "params": problem.params,
        "x_true": problem.x_true,
        "files": { "matrix": matrix_path, "rhs": rhs_path },
        "oracle": oracle,
    });
    let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    std::fs::write(&sidecar_path, format!("{text}\n"))?;
    println!("{text}");
    Ok(())
}

// ---------------------------------------------------------------------------
// problem input shared by solve / compare / constraints

#[derive(Args)]
struct ProblemSource {
    /// Path prefix written by `generate` (reads <p>.A.txt and <p>.b.txt).
    #[arg(long)]
    problem: Option<String>,
    /// Explicit matrix file (dense text or MatrixMarket array).
    #[arg(long, requires = "rhs", conflicts_with = "problem")]
    matrix: Option<PathBuf>,
    /// Explicit right-hand-side file.
    #[arg(long, requires = "matrix", conflicts_with = "problem")]
    rhs: Option<PathBuf>,
}

struct LoadedProblem {
    a: Matrix,
    b: Vec<f64>,
    label: String,
    seed: Option<u64>,
}

fn load_from_prefix(prefix: &str) -> Result<LoadedProblem, Error> {
    let a = io::read_matrix(Path::new(&format!("{prefix}.A.txt")))?;
    let b = io::read_vector(Path::new(&format!("{prefix}.b.txt")))?;
    let mut label = prefix.to_string();
    let mut seed = None;
    if let Ok(text) = std::fs::read_to_string(format!("{prefix}.json")) {
        if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
            if let Some(l) = v.get("label").and_then(|l| l.as_str()) {
                label = l.to_string();
            }
            seed = v.get("seed").and_then(|s| s.as_u64());
        }
    }
    Ok(LoadedProblem { a, b, label, seed })
}

/// Inline generator reference inside a config file.
#[derive(Deserialize)]
struct GenSpec {
    generator: String,
    m: Option<usize>,
    n: Option<usize>,
    eps: Option<f64>,
    delta: Option<f64>,
    omega: Option<usize>,
    alpha: Option<f64>,
    scale: Option<f64>,
    seed: Option<u64>,
}

fn build_from_spec(spec: &GenSpec) -> Result<TlsProblem, Error> {
    let seed = spec.seed.unwrap_or(1);
    match spec.generator.as_str() {
        "random" => problems::gen_random(
            spec.m.unwrap_or(100),
            spec.n.unwrap_or(60),
            spec.eps.unwrap_or(1e-6),
            seed,
        ),
        "delta" => problems::gen_delta(
            spec.delta.unwrap_or(1e-2),
            spec.eps.unwrap_or(0.1),
            seed,
        ),
        "bjorck" => problems::gen_bjorck(
            spec.m.unwrap_or(30),
            spec.n.unwrap_or(15),
            spec.eps.unwrap_or(0.05),
            seed,
        ),
        "toeplitz" => problems::gen_toeplitz(
            spec.n.unwrap_or(100),
            spec.omega.unwrap_or(2),
            spec.alpha.unwrap_or(1.25),
            spec.scale.unwrap_or(1e-3),
            seed,
        ),
        "vanhuffel" => problems::gen_vanhuffel(
            spec.n.unwrap_or(100),
            spec.eps.unwrap_or(1e-6),
            seed,
        ),
        other => Err(Error::InvalidParameter(format!(
            "unknown generator {other:?}; expected random, delta, bjorck, toeplitz, or vanhuffel"
        ))),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProblemSpec {
    Path { path: String },
    Generated(GenSpec),
}

/// Config-file counterpart of the solve/compare flags; any flag given on the
/// command line overrides the corresponding field.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    problem: Option<ProblemSpec>,
    u: Option<String>,
    up: Option<String>,
    uq: Option<String>,
    precond: Option<String>,
    stop: Option<String>,
    max_outer: Option<usize>,
    force_outer: Option<usize>,
    trace_out: Option<String>,
    summary_out: Option<String>,
    /// Run uniform and mixed configurations side by side (solve behaves as
    /// compare).
    compare: Option<bool>,
    u2: Option<String>,
    up2: Option<String>,
    uq2: Option<String>,
    precond2: Option<String>,
}

fn read_config(path: &Path) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("config {}: {e}", path.display())))
}

fn parse_precond_name(name: &str) -> Result<PreconditionerKind, Error> {
    match name {
        "qr" => Ok(PreconditionerKind::Qr),
        "cholesky" => Ok(PreconditionerKind::Cholesky),
        other => Err(Error::InvalidParameter(format!(
            "unknown preconditioner {other:?}; expected qr or cholesky"
        ))),
    }
}

fn parse_stop_name(name: &str) -> Result<StopRule, Error> {
    match name {
        "strict" => Ok(StopRule::Strict),
        "weak" => Ok(StopRule::Weak),
        other => Err(Error::InvalidParameter(format!(
            "unknown stop rule {other:?}; expected strict or weak"
        ))),
    }
}

// ---------------------------------------------------------------------------
// solve

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: ProblemSource,
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Working precision (fp16|fp32|fp64).
    #[arg(long)]
    u: Option<String>,
    /// Inner-solve precision.
    #[arg(long)]
    up: Option<String>,
    /// Factorization precision.
    #[arg(long)]
    uq: Option<String>,
    #[arg(long, value_enum)]
    precond: Option<PrecondArg>,
    #[arg(long, value_enum)]
    stop: Option<StopArg>,
    #[arg(long)]
    max_outer: Option<usize>,
    /// Run exactly this many outer iterations, ignoring the stop rule.
    #[arg(long)]
    force_outer: Option<usize>,
    /// Trace CSV path (default: <problem>.trace.csv).
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Also write the summary JSON here (it always goes to stdout).
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

struct VariantConfig {
    u: String,
    up: String,
    uq: String,
    precond: String,
    label: String,
}

impl VariantConfig {
    fn options(&self, stop: StopRule, max_outer: usize, force: Option<usize>) -> Result<RqiOptions, Error> {
        Ok(RqiOptions {
            precisions: PrecisionConfig::new(
                parse_format(&self.u)?,
                parse_format(&self.up)?,
                parse_format(&self.uq)?,
            )?,
            preconditioner: parse_precond_name(&self.precond)?,
            max_outer,
            stop_rule: stop,
            force_outer: force,
            ..RqiOptions::default()
        })
    }
}

fn obtain_problem(
    source: &ProblemSource,
    config: &ExperimentConfig,
) -> Result<LoadedProblem, Error> {
    if let Some(prefix) = &source.problem {
        return load_from_prefix(prefix);
    }
    if let (Some(matrix), Some(rhs)) = (&source.matrix, &source.rhs) {
        let a = io::read_matrix(matrix)?;
        let b = io::read_vector(rhs)?;
        let label = matrix
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "problem".into());
        return Ok(LoadedProblem { a, b, label, seed: None });
    }
    match &config.problem {
        Some(ProblemSpec::Path { path }) => load_from_prefix(path),
        Some(ProblemSpec::Generated(spec)) => {
            let p = build_from_spec(spec)?;
            Ok(LoadedProblem {
                label: p.label,
                seed: Some(p.seed),
                a: p.a,
                b: p.b,
            })
        }
        None => Err(Error::InvalidParameter(
            "no problem given: use --problem, --matrix/--rhs, or a config file".into(),
        )),
    }
}

fn run_variant(
    problem: &LoadedProblem,
    variant: &VariantConfig,
    stop: StopRule,
    max_outer: usize,
    force: Option<usize>,
) -> Result<RqiResult, Error> {
    let reference = tls_solve_exact(&problem.a, &problem.b)?;
    let opts = variant.options(stop, max_outer, force)?;
    rqi_pcgtls_mp(&problem.a, &problem.b, &reference, &opts)
}

fn effective_config_json(
    problem: &LoadedProblem,
    variant: &VariantConfig,
    stop: StopArg,
    max_outer: usize,
    force: Option<usize>,
) -> serde_json::Value {
    json!({
        "problem": { "label": problem.label, "seed": problem.seed },
        "u": variant.u,
        "up": variant.up,
        "uq": variant.uq,
        "precond": variant.precond,
        "stop": stop.as_str(),
        "max_outer": max_outer,
        "force_outer": force,
    })
}

fn summary_json(
    problem: &LoadedProblem,
    config: serde_json::Value,
    res: &RqiResult,
) -> Result<serde_json::Value, Error> {
    let constraints = evaluate_uq_constraints(
        &problem.a,
        &problem.b,
        1.0,
        &mptls::constraints::default_candidates(),
    )?;
    Ok(json!({
        "config": config,
        "problem": { "label": problem.label, "m": problem.a.rows(), "n": problem.a.cols() },
        "termination_reason": res.termination.as_str(),
        "termination": res.termination,
        "outer_iterations": res.outer_iterations,
        "final_rerrx": res.rerrx,
        "final_rerrs": res.rerrs,
        "sigma_sq": res.sigma_sq,
        "flops_by_format": res.flops.by_format(),
        "flops_total": res.flops.total(),
        "events": res.events,
        "constraints": constraints,
    }))
}

fn cmd_solve(args: SolveArgs) -> Result<(), Error> {
    let config = match &args.config {
        Some(path) => read_config(path)?,
        None => ExperimentConfig::default(),
    };
    if config.compare.unwrap_or(false) {
        return compare_impl(CompareArgs::from_solve(args), config);
    }
    let problem = obtain_problem(&args.source, &config)?;
    let variant = VariantConfig {
        u: args.u.or(config.u).unwrap_or_else(|| "fp64".into()),
        up: args.up.or(config.up).unwrap_or_else(|| "fp64".into()),
        uq: args.uq.or(config.uq).unwrap_or_else(|| "fp64".into()),
        precond: args
            .precond
            .map(|p| p.as_str().to_string())
            .or(config.precond)
            .unwrap_or_else(|| "qr".into()),
        label: "solve".into(),
    };
    let stop_arg = match args.stop {
        Some(s) => s,
        None => match config.stop.as_deref() {
            Some("weak") => StopArg::Weak,
            Some("strict") | None => StopArg::Strict,
            Some(other) => return Err(Error::InvalidParameter(format!(
                "unknown stop rule {other:?}; expected strict or weak"
            ))),
        },
    };
    let max_outer = args.max_outer.or(config.max_outer).unwrap_or(50);
    let force = args.force_outer.or(config.force_outer);
    let res = run_variant(&problem, &variant, stop_arg.into(), max_outer, force)?;

    // Default the trace next to the problem files when they exist; the label
    // alone would collide across instances from the same generator.
    let default_stem = args
        .source
        .problem
        .clone()
        .or_else(|| {
            args.source
                .matrix
                .as_ref()
                .map(|p| p.with_extension("").to_string_lossy().into_owned())
        })
        .unwrap_or_else(|| problem.label.clone());
    let trace_path = args
        .trace_out
        .or_else(|| config.trace_out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("{default_stem}.trace.csv")));
    io::write_trace_csv(&trace_path, &res.trace)?;

    let effective = effective_config_json(&problem, &variant, stop_arg, max_outer, force);
    let summary = summary_json(&problem, effective, &res)?;
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    if let Some(path) = args
        .summary_out
        .or_else(|| config.summary_out.as_ref().map(PathBuf::from))
    {
        std::fs::write(path, format!("{text}\n"))?;
    }
    println!("{text}");
    Ok(())
}

// ---------------------------------------------------------------------------
// compare

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    source: ProblemSource,
    #[arg(long)]
    config: Option<PathBuf>,
    /// First variant's precisions (defaults: uniform fp64).
    #[arg(long)]
    u: Option<String>,
    #[arg(long)]
    up: Option<String>,
    #[arg(long)]
    uq: Option<String>,
    #[arg(long, value_enum)]
    precond: Option<PrecondArg>,
    /// Second variant's precisions (defaults: fp64 / fp32 / fp16).
    #[arg(long)]
    u2: Option<String>,
    #[arg(long)]
    up2: Option<String>,
    #[arg(long)]
    uq2: Option<String>,
    #[arg(long, value_enum)]
    precond2: Option<PrecondArg>,
    #[arg(long, value_enum)]
    stop: Option<StopArg>,
    #[arg(long)]
    max_outer: Option<usize>,
    /// Labels used in the `variant` column.
    #[arg(long, default_value = "uniform")]
    label_a: String,
    #[arg(long, default_value = "mp")]
    label_b: String,
    /// Combined CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CompareArgs {
    fn from_solve(args: SolveArgs) -> CompareArgs {
        CompareArgs {
            source: args.source,
            config: None,
            u: args.u,
            up: args.up,
            uq: args.uq,
            precond: args.precond,
            u2: None,
            up2: None,
            uq2: None,
            precond2: None,
            stop: args.stop,
            max_outer: args.max_outer,
            label_a: "uniform".into(),
            label_b: "mp".into(),
            out: args.trace_out,
        }
    }
}

fn compare_impl(args: CompareArgs, config: ExperimentConfig) -> Result<(), Error> {
    let problem = obtain_problem(&args.source, &config)?;
    let first = VariantConfig {
        u: args.u.or(config.u).unwrap_or_else(|| "fp64".into()),
        up: args.up.or(config.up).unwrap_or_else(|| "fp64".into()),
        uq: args.uq.or(config.uq).unwrap_or_else(|| "fp64".into()),
        precond: args
            .precond
            .map(|p| p.as_str().to_string())
            .or(config.precond)
            .unwrap_or_else(|| "qr".into()),
        label: args.label_a.clone(),
    };
    let second = VariantConfig {
        u: args.u2.or(config.u2).unwrap_or_else(|| "fp64".into()),
        up: args.up2.or(config.up2).unwrap_or_else(|| "fp32".into()),
        uq: args.uq2.or(config.uq2).unwrap_or_else(|| "fp16".into()),
        precond: args
            .precond2
            .map(|p| p.as_str().to_string())
            .or(config.precond2)
            .unwrap_or_else(|| "qr".into()),
        label: args.label_b.clone(),
    };
    let stop: StopRule = args
        .stop
        .map(StopRule::from)
        .map(Ok)
        .unwrap_or_else(|| parse_stop_name(config.stop.as_deref().unwrap_or("strict")))?;
    let max_outer = args.max_outer.or(config.max_outer).unwrap_or(50);

    let res_a = run_variant(&problem, &first, stop, max_outer, None)?;
    let res_b = run_variant(&problem, &second, stop, max_outer, None)?;
    let csv = io::compare_to_csv(&[
        (first.label.as_str(), &res_a.trace[..]),
        (second.label.as_str(), &res_b.trace[..]),
    ]);
    let out = args
        .out
        .or_else(|| config.trace_out.as_ref().map(PathBuf::from));
    match out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), Error> {
    let config = match &args.config {
        Some(path) => read_config(path)?,
        None => ExperimentConfig::default(),
    };
    compare_impl(args, config)
}

// ---------------------------------------------------------------------------
// constraints

#[derive(Args)]
struct ConstraintsArgs {
    #[command(flatten)]
    source: ProblemSource,
    /// Dimensional constant in the probabilistic/deterministic bounds.
    #[arg(long, default_value_t = 1.0)]
    constant: f64,
    /// Candidate formats to assess.
    #[arg(long, value_delimiter = ',', default_values_t = ["fp16".to_string(), "fp32".to_string(), "fp64".to_string()])]
    formats: Vec<String>,
    /// Also write the report here (it always goes to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_constraints(args: ConstraintsArgs) -> Result<(), Error> {
    let problem = obtain_problem(&args.source, &ExperimentConfig::default())?;
    let candidates = args
        .formats
        .iter()
        .map(|f| parse_format(f))
        .collect::<Result<Vec<_>, _>>()?;
    let report = evaluate_uq_constraints(&problem.a, &problem.b, args.constant, &candidates)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(path) = args.out {
        std::fs::write(path, format!("{text}\n"))?;
    }
    println!("{text}");
    Ok(())
}

// ---------------------------------------------------------------------------
// perf

#[derive(Args)]
struct PerfArgs {
    /// Row-count range as lo:hi (log-spaced).
    #[arg(long, default_value = "1:1000000")]
    m_range: String,
    /// Column-count range as lo:hi (log-spaced).
    #[arg(long, default_value = "1:1000000")]
    n_range: String,
    /// Grid points per axis.
    #[arg(long, default_value_t = 20)]
    points: usize,
    /// Outer iteration count of the modeled run.
    #[arg(long, default_value_t = 20)]
    r: u64,
    /// Mixed-precision cost constants.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0.5)]
    cp: f64,
    #[arg(long, default_value_t = 0.25)]
    cq: f64,
    /// CSV path (default: stdout). Cells with n > m are omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(text: &str) -> Result<(u64, u64), Error> {
    let err = || {
        Error::InvalidParameter(format!(
            "range must be lo:hi with 1 <= lo <= hi, got {text:?}"
        ))
    };
    let (lo, hi) = text.split_once(':').ok_or_else(err)?;
    let lo: u64 = lo.parse().map_err(|_| err())?;
    let hi: u64 = hi.parse().map_err(|_| err())?;
    if lo < 1 || hi < lo {
        return Err(err());
    }
    Ok((lo, hi))
}

fn cmd_perf(args: PerfArgs) -> Result<(), Error> {
    if args.points < 2 {
        return Err(Error::InvalidParameter("need at least 2 grid points".into()));
    }
    if !(args.c > 0.0) || args.cp < 0.0 || args.cq < 0.0 {
        return Err(Error::InvalidParameter(
            "cost constants must satisfy c > 0, cp >= 0, cq >= 0".into(),
        ));
    }
    let (m_lo, m_hi) = parse_range(&args.m_range)?;
    let (n_lo, n_hi) = parse_range(&args.n_range)?;
    let ms = perf::logspace_sizes(m_lo, m_hi, args.points);
    let ns = perf::logspace_sizes(n_lo, n_hi, args.points);
    let mixed = CostConstants {
        c: args.c,
        c_p: args.cp,
        c_q: args.cq,
    };
    let cells = perf::speedup_grid(&ms, &ns, args.r, &mixed, &CostConstants::uniform());
    let mut csv = String::from("m,n,r,speedup\n");
    for cell in cells {
        if let Some(s) = cell.speedup {
            csv.push_str(&format!("{},{},{},{:e}\n", cell.m, cell.n, cell.r, s));
        }
    }
    match args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// entry point and exit-code mapping

/// 1 for usage-class errors, 2 for numerical failures.
fn classify(e: &Error) -> (u8, &'static str) {
    match e {
        Error::InvalidFormat(_) => (1, "invalid_format"),
        Error::InvalidParameter(_) => (1, "invalid_parameter"),
        Error::DimensionMismatch(_) => (1, "dimension_mismatch"),
        Error::Io(_) => (1, "io"),
        Error::RankDeficient(_) => (2, "rank_deficient"),
        Error::CholeskyBreakdown { .. } => (2, "cholesky_breakdown"),
        Error::NonUniqueTls { .. } => (2, "non_unique_tls"),
        Error::SvdNoConvergence { .. } => (2, "svd_no_convergence"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = json!({ "error": { "kind": "usage", "message": e.to_string() } });
            eprintln!("{msg}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.cmd {
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Compare(args) => cmd_compare(args),
        Cmd::Constraints(args) => cmd_constraints(args),
        Cmd::Perf(args) => cmd_perf(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, kind) = classify(&e);
            let msg = json!({ "error": { "kind": kind, "message": e.to_string() } });
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}

// Keep the derive surface honest even when only `try_parse` is exercised.
#[test]
fn cli_definition_is_consistent() {
    use clap::CommandFactory;
    Cli::command().debug_assert();
}
