use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::algorithms::{self, AlgorithmChoice};
use crate::audit::{
    certify_for_lemmas, diversity_certify, lemma_inequality_check, reuse_audit, unhelpfulness_check, AuditParams,
    AuditReport, Property,
};
use crate::bits::ColumnInterval;
use crate::error::{Error, Result};
use crate::hardgen::{density_matched_random, random_instance, rs_family, TripartiteInstance};
use crate::io::{csv_string, write_atomic};

use super::kind_name;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecKind {
    Random,
    Rs,
    /// Random instances with the densities of the RS instance of the same
    /// size and seed.
    Matched,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchAudit {
    Diversity,
    Unhelpful,
    Reuse,
    Lemmas,
}

fn default_grid() -> Vec<usize> {
    vec![256, 512, 1024, 2048]
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

fn half() -> f64 {
    0.5
}

/// A reproducible experiment grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: SpecKind,
    #[serde(default = "default_grid")]
    pub n: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Density of P (random).
    #[serde(default = "half")]
    pub density: f64,
    /// Density of Q (random); defaults to `density`.
    #[serde(default)]
    pub density_q: Option<f64>,
    /// Sparsify probability (rs, matched).
    #[serde(default = "half")]
    pub prob: f64,
    pub algorithms: Vec<AlgorithmChoice>,
    #[serde(default)]
    pub audits: Vec<BenchAudit>,
    #[serde(default)]
    pub audit_params: Option<AuditParams>,
    /// CSV of cost rows; relative paths resolve against the spec's directory.
    pub output: PathBuf,
    /// JSON array of audit reports.
    #[serde(default)]
    pub audit_output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(Error::InvalidParameter("n grid must be non-empty and positive".into()));
        }
        if self.seeds.is_empty() || self.algorithms.is_empty() {
            return Err(Error::InvalidParameter("seeds and algorithms must be non-empty".into()));
        }
        if !self.audits.is_empty() && self.audit_output.is_none() {
            return Err(Error::InvalidParameter("audits need audit_output".into()));
        }
        if let Some(p) = &self.audit_params {
            p.validate()?;
        }
        Ok(())
    }

    pub fn instance(&self, n: usize, seed: u64) -> Result<TripartiteInstance> {
        match self.kind {
            SpecKind::Random => random_instance(n, n, n, self.density, self.density_q.unwrap_or(self.density), seed),
            SpecKind::Rs => rs_family(n, self.prob, seed),
            SpecKind::Matched => density_matched_random(&rs_family(n, self.prob, seed)?, seed),
        }
    }
}

/// One cost row with rates against the grid size `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub n: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub n_c: usize,
    pub kind: String,
    pub seed: u64,
    pub gates: u64,
    pub distinct_classes: u64,
    pub class_cost: u64,
    pub total: u64,
    /// `total / (n³ / log² n)`
    pub rate_n3_log2sq: f64,
    /// `total / (n² log n)`
    pub rate_n2_log: f64,
    /// `total · 2^√(log n) / n³`
    pub rate_behrend: f64,
    pub valid: bool,
    pub wall_ms: f64,
}

/// Rates of `total` at grid size `n`, in column order.
pub fn rates(total: u64, n: usize) -> [f64; 3] {
    let n = n.max(2) as f64;
    let lg = n.log2();
    let t = total as f64;
    let cube = n * n * n;
    [t * lg * lg / cube, t / (n * n * lg), t * lg.sqrt().exp2() / cube]
}

#[derive(Serialize)]
struct TaggedReport<'a> {
    algorithm: &'a str,
    n: usize,
    seed: u64,
    #[serde(flatten)]
    report: AuditReport,
}

pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    pub all_valid: bool,
    pub summary: Vec<String>,
}

fn audit_one(
    which: BenchAudit,
    choice: &AlgorithmChoice,
    inst: &TripartiteInstance,
    params: &AuditParams,
) -> Result<AuditReport> {
    match which {
        BenchAudit::Diversity => diversity_certify(inst, params.k, params.l, params.mode),
        BenchAudit::Unhelpful => {
            unhelpfulness_check(inst, ColumnInterval::full(inst.n_c()), params.k, params.l, params.mode)
        }
        BenchAudit::Reuse => reuse_audit(&algorithms::build(choice, inst)?, inst, params),
        BenchAudit::Lemmas => {
            let w = algorithms::build(choice, inst)?;
            let certs = certify_for_lemmas(&w, inst, params)?;
            let k = certs
                .iter()
                .filter(|c| c.property == Property::Unhelpful)
                .map(|c| c.k)
                .max()
                .unwrap_or(1);
            lemma_inequality_check(&w, inst, &AuditParams { k, ..*params }, &certs)
        }
    }
}

/// Runs the grid sequentially and writes the outputs; relative output paths
/// resolve against `base`.
pub fn run_bench(spec: &ExperimentSpec, base: &Path) -> Result<BenchOutcome> {
    spec.validate()?;
    let params = spec.audit_params.unwrap_or_default();
    let mut rows = Vec::new();
    let mut audits = Vec::new();
    for &n in &spec.n {
        for &seed in &spec.seeds {
            let inst = spec.instance(n, seed)?;
            for choice in &spec.algorithms {
                let start = Instant::now();
                let run = algorithms::meter(choice, &inst)?;
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                let r = &run.report;
                let [rate_n3_log2sq, rate_n2_log, rate_behrend] = rates(r.total, n);
                rows.push(BenchRow {
                    algorithm: choice.algorithm.name().to_string(),
                    n,
                    n_a: inst.n_a(),
                    n_b: inst.n_b(),
                    n_c: inst.n_c(),
                    kind: kind_name(&inst),
                    seed,
                    gates: r.gate_count,
                    distinct_classes: r.distinct_class_count,
                    class_cost: r.class_cost_sum,
                    total: r.total,
                    rate_n3_log2sq,
                    rate_n2_log,
                    rate_behrend,
                    valid: run.outputs_ok(),
                    wall_ms,
                });
                for &which in &spec.audits {
                    audits.push(TaggedReport {
                        algorithm: choice.algorithm.name(),
                        n,
                        seed,
                        report: audit_one(which, choice, &inst, &params)?,
                    });
                }
            }
        }
    }

    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    write_atomic(&resolve(&spec.output), csv_string(&rows)?.as_bytes())?;
    if let Some(out) = &spec.audit_output {
        let json = serde_json::to_string_pretty(&audits)? + "\n";
        write_atomic(&resolve(out), json.as_bytes())?;
    }

    let mut summary = Vec::new();
    for choice in &spec.algorithms {
        for &n in &spec.n {
            let sel: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.n == n && r.algorithm == choice.algorithm.name())
                .collect();
            let mean = |f: fn(&BenchRow) -> f64| sel.iter().map(|r| f(r)).sum::<f64>() / sel.len() as f64;
            summary.push(format!(
                "{} n={n} total={:.0} rate_n3_log2sq={:.4} rate_n2_log={:.4} rate_behrend={:.4}",
                choice.algorithm,
                mean(|r| r.total as f64),
                mean(|r| r.rate_n3_log2sq),
                mean(|r| r.rate_n2_log),
                mean(|r| r.rate_behrend),
            ));
        }
    }
    let all_valid = rows.iter().all(|r| r.valid);
    Ok(BenchOutcome {
        rows,
        all_valid,
        summary,
    })
}
