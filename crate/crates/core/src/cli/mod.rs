//! The `bmmlab` command line.

mod bench;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use bench::{rates, run_bench, BenchAudit, BenchOutcome, BenchRow, ExperimentSpec, SpecKind};

use crate::algorithms::{self, Algorithm, AlgorithmChoice};
use crate::audit::{
    certify_for_lemmas, density_check, diversity_certify, lemma_inequality_check, random_density_config,
    reuse_audit, unhelpfulness_check, AuditMode, AuditParams, AuditReport, DensityConfig,
    Property,
};
use crate::bits::ColumnInterval;
use crate::error::{Error, Result};
use crate::hardgen::{
    ap_free_set, build_instance, build_rt_graph, random_instance, ApMethod, InstanceKind, TripartiteInstance,
};
use crate::io::{self, append_csv, read_instance, read_witness, write_atomic};
use crate::rng::derive_seed;
use crate::witness::{cost_report, validate_witness, CircuitBuilder, CostReport, WitnessCircuit};

/// Exit status: success.
pub const EXIT_OK: i32 = 0;
/// Exit status: a witness failed validation or a proved inequality failed.
pub const EXIT_FAILED: i32 = 1;
/// Exit status: bad arguments, unreadable input or unmet preconditions.
pub const EXIT_USAGE: i32 = 2;

/// Caps rayon's worker count.
pub const THREADS_ENV: &str = "BMMLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "bmmlab", version, about = "Witness-circuit cost laboratory for Boolean matrix multiplication")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Run an algorithm on an instance and report its witness cost.
    Run(RunArgs),
    /// Run an audit and write its JSON report.
    Audit(AuditArgs),
    /// Run an experiment grid from a TOML spec.
    Bench(BenchArgs),
    /// Validate a stored witness against a stored instance.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Rs,
    Random,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Number of matchings (rs).
    #[arg(long)]
    pub m: Option<usize>,
    /// Size scale: rs uses `m = n / 3`; random uses n for every part.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub n_a: Option<usize>,
    #[arg(long)]
    pub n_b: Option<usize>,
    #[arg(long)]
    pub n_c: Option<usize>,
    /// Progression-free set method (rs): greedy | behrend.
    #[arg(long, default_value = "greedy")]
    pub s: String,
    /// Probability of deleting each edge of P (rs).
    #[arg(long, default_value_t = 0.5)]
    pub prob: f64,
    /// Density of P (random); also of Q unless --density-q is given.
    #[arg(long, default_value_t = 0.5)]
    pub density: f64,
    #[arg(long)]
    pub density_q: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlgArgs {
    /// naive | memo | fourrussians | block
    #[arg(long)]
    pub alg: String,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub w: Option<usize>,
}

impl AlgArgs {
    fn choice(&self) -> Result<AlgorithmChoice> {
        Ok(AlgorithmChoice {
            algorithm: self.alg.parse()?,
            t: self.t,
            w: self.w,
        })
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub alg: AlgArgs,
    #[arg(long)]
    pub instance: PathBuf,
    /// CSV file to append the cost row to.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the materialized witness here.
    #[arg(long)]
    pub witness_out: Option<PathBuf>,
    /// Build the full circuit and validate every gate instead of streaming.
    #[arg(long)]
    pub materialize: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Diversity,
    Unhelpful,
    Density,
    Reuse,
    Lemmas,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long, value_enum)]
    pub check: CheckKind,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Witness file for reuse and lemmas; otherwise built with --alg.
    #[arg(long)]
    pub witness: Option<PathBuf>,
    #[arg(long)]
    pub alg: Option<String>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub w: Option<usize>,
    /// For lemmas, defaults to the smallest certified value.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub l: usize,
    #[arg(long, default_value_t = 4)]
    pub c: usize,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long, default_value_t = 20)]
    pub c0: usize,
    #[arg(long, default_value_t = 7)]
    pub c1: usize,
    /// Sample this many sets instead of enumerating.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Interval for unhelpfulness (1-based, inclusive); defaults to all of C.
    #[arg(long)]
    pub lo: Option<usize>,
    #[arg(long)]
    pub hi: Option<usize>,
    /// Density: a JSON configuration file instead of random ones.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Density: number of random configurations.
    #[arg(long, default_value_t = 1000)]
    pub configs: usize,
    /// Density: universe size of random configurations.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Overrides the spec's output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub witness: PathBuf,
}

/// One row of `run` output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostRow {
    pub algorithm: String,
    pub n_a: usize,
    pub n_b: usize,
    pub n_c: usize,
    pub kind: String,
    pub seed: u64,
    pub gates: u64,
    pub distinct_classes: u64,
    pub class_cost: u64,
    pub total: u64,
    pub wall_ms: f64,
}

impl CostRow {
    pub fn new(alg: Algorithm, inst: &TripartiteInstance, report: &CostReport, wall_ms: f64) -> Self {
        Self {
            algorithm: alg.name().to_string(),
            n_a: inst.n_a(),
            n_b: inst.n_b(),
            n_c: inst.n_c(),
            kind: kind_name(inst),
            seed: inst.seed(),
            gates: report.gate_count,
            distinct_classes: report.distinct_class_count,
            class_cost: report.class_cost_sum,
            total: report.total,
            wall_ms,
        }
    }
}

pub(crate) fn kind_name(inst: &TripartiteInstance) -> String {
    match inst.source().kind {
        InstanceKind::Rs => "rs",
        InstanceKind::Random => "random",
        InstanceKind::Explicit => "explicit",
    }
    .to_string()
}

/// Applies [`THREADS_ENV`] to rayon's global pool.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // A pool that was already configured keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses arguments, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Audit(a) => cmd_audit(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Verify(a) => cmd_verify(&a),
    }
}

fn cmd_gen(a: &GenArgs) -> Result<i32> {
    let (inst, r, t) = match a.kind {
        GenKind::Rs => {
            let m = match (a.m, a.n) {
                (Some(m), _) => m,
                (None, Some(n)) => (n / 3).max(1),
                (None, None) => return Err(Error::InvalidParameter("rs instances need --m or --n".into())),
            };
            let method: ApMethod = a.s.parse()?;
            let g = build_rt_graph(m, ap_free_set(m, method)?)?;
            if a.prob >= 1.0 {
                eprintln!("warning: sparsify probability {} removes every edge of P", a.prob);
            }
            let inst = build_instance(&g, a.prob, a.seed)?;
            (inst, g.r().to_string(), g.m().to_string())
        }
        GenKind::Random => {
            let size = |part: Option<usize>, name: &str| {
                part.or(a.n)
                    .ok_or_else(|| Error::InvalidParameter(format!("random instances need --n or --{name}")))
            };
            let inst = random_instance(
                size(a.n_a, "n-a")?,
                size(a.n_b, "n-b")?,
                size(a.n_c, "n-c")?,
                a.density,
                a.density_q.unwrap_or(a.density),
                a.seed,
            )?;
            (inst, "-".into(), "-".into())
        }
    };
    write_atomic(&a.out, io::instance_to_json(&inst)?.as_bytes())?;
    println!(
        "r={r} t={t} n_a={} n_b={} n_c={} ones_p={}",
        inst.n_a(),
        inst.n_b(),
        inst.n_c(),
        inst.p().count_ones()
    );
    Ok(EXIT_OK)
}

fn cmd_run(a: &RunArgs) -> Result<i32> {
    let choice = a.alg.choice()?;
    let inst = read_instance(&a.instance)?;
    let start = Instant::now();
    let (report, ok) = if a.materialize || a.witness_out.is_some() {
        let mut builder = CircuitBuilder::new(inst.n_a());
        let meta = algorithms::emit(&choice, &inst, &mut builder)?;
        let w = builder.finish();
        let validation = validate_witness(&w, &inst)?;
        let mut report = cost_report(&w, &inst)?;
        report.meta = meta.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        if let Some(path) = &a.witness_out {
            write_atomic(path, io::witness_to_json(&w)?.as_bytes())?;
        }
        if !validation.correct {
            eprintln!("validation failed: {}", serde_json::to_string(&validation)?);
        }
        (report, validation.correct)
    } else {
        let run = algorithms::meter(&choice, &inst)?;
        if !run.outputs_ok() {
            let rows: Vec<usize> = run.mismatched_rows.iter().take(10).map(|r| r + 1).collect();
            eprintln!("validation failed: rows {rows:?} disagree with the product");
        }
        let ok = run.outputs_ok();
        (run.report, ok)
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let row = CostRow::new(choice.algorithm, &inst, &report, wall_ms);
    print!("{}", io::csv_string(std::slice::from_ref(&row))?);
    if let Some(path) = &a.report {
        append_csv(path, &[row])?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

fn witness_for(a: &AuditArgs, inst: &TripartiteInstance) -> Result<WitnessCircuit> {
    match (&a.witness, &a.alg) {
        (Some(path), _) => read_witness(path),
        (None, Some(alg)) => algorithms::build(
            &AlgorithmChoice {
                algorithm: alg.parse()?,
                t: a.t,
                w: a.w,
            },
            inst,
        ),
        (None, None) => Err(Error::InvalidParameter("this check needs --witness or --alg".into())),
    }
}

fn audit_params(a: &AuditArgs, k: usize) -> AuditParams {
    AuditParams {
        k,
        l: a.l,
        c: a.c,
        d: a.d,
        c0: a.c0,
        c1: a.c1,
        mode: match a.trials {
            Some(trials) => AuditMode::Sample { trials, seed: a.seed },
            None => AuditMode::Exhaustive,
        },
    }
}

fn need_instance(a: &AuditArgs) -> Result<TripartiteInstance> {
    let path = a
        .instance
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("this check needs --instance".into()))?;
    read_instance(path)
}

/// Many random density configurations folded into one report.
fn density_sweep(n: usize, configs: usize, seed: u64) -> Result<AuditReport> {
    let mut report = AuditReport::new("density");
    let mut min_slack = f64::INFINITY;
    for i in 0..configs {
        let s = derive_seed(seed, i as u64);
        let r = 1 + (s % n as u64) as usize;
        let cfg = random_density_config(n, r, s)?;
        let one = density_check(&cfg.intervals, &cfg.elements, n)?;
        min_slack = min_slack.min(one.measured["qualifying"] - one.bound["qualifying"]);
        if !one.pass {
            report.note(format!("configuration {} (seed {s}) fails", i + 1));
            if let Some(cx) = one.counterexample {
                report.fail(cx);
            }
        }
    }
    report
        .measure("configurations", configs as f64)
        .measure("n", n as f64)
        .measure("min_slack", min_slack)
        .bound("min_slack", 0.0);
    Ok(report)
}

fn cmd_audit(a: &AuditArgs) -> Result<i32> {
    let report = match a.check {
        CheckKind::Density => match &a.config {
            Some(path) => {
                let cfg: DensityConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                density_check(&cfg.intervals, &cfg.elements, cfg.n)?
            }
            None => {
                if a.n == 0 || a.configs == 0 {
                    return Err(Error::InvalidParameter("--n and --configs must be at least 1".into()));
                }
                density_sweep(a.n, a.configs, a.seed)?
            }
        },
        CheckKind::Diversity => {
            let inst = need_instance(a)?;
            let p = audit_params(a, a.k.unwrap_or(2));
            diversity_certify(&inst, p.k, p.l, p.mode)?
        }
        CheckKind::Unhelpful => {
            let inst = need_instance(a)?;
            let p = audit_params(a, a.k.unwrap_or(2));
            let k_int = ColumnInterval::within(a.lo.unwrap_or(1), a.hi.unwrap_or(inst.n_c()), inst.n_c())?;
            unhelpfulness_check(&inst, k_int, p.k, p.l, p.mode)?
        }
        CheckKind::Reuse => {
            let inst = need_instance(a)?;
            let w = witness_for(a, &inst)?;
            reuse_audit(&w, &inst, &audit_params(a, a.k.unwrap_or(2)))?
        }
        CheckKind::Lemmas => {
            let inst = need_instance(a)?;
            let w = witness_for(a, &inst)?;
            let base = audit_params(a, a.k.unwrap_or(1));
            let certs = certify_for_lemmas(&w, &inst, &base)?;
            let certified_k = certs
                .iter()
                .filter(|c| c.property == Property::Unhelpful)
                .map(|c| c.k)
                .max()
                .unwrap_or(1);
            let params = AuditParams {
                k: a.k.unwrap_or(certified_k),
                ..base
            };
            let mut report = lemma_inequality_check(&w, &inst, &params, &certs)?;
            report.measure("k", params.k as f64);
            report
        }
    };
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match &a.out {
        Some(path) => write_atomic(path, json.as_bytes())?,
        None => print!("{json}"),
    }
    let proved = matches!(a.check, CheckKind::Density | CheckKind::Lemmas);
    Ok(if proved && !report.pass { EXIT_FAILED } else { EXIT_OK })
}

fn cmd_bench(a: &BenchArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&a.spec)?;
    let mut spec: ExperimentSpec = toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(out) = &a.out {
        spec.output = out.clone();
    }
    let base = a.spec.parent().unwrap_or(Path::new("."));
    let outcome = run_bench(&spec, base)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    Ok(if outcome.all_valid { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let inst = read_instance(&a.instance)?;
    let w = read_witness(&a.witness)?;
    let report = validate_witness(&w, &inst)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.correct { EXIT_OK } else { EXIT_FAILED })
}
