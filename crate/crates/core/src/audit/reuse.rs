use std::collections::BTreeMap;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::{ceil_log2, AuditParams, AuditReport, Counterexample};
use crate::bits::ColumnInterval;
use crate::error::Result;
use crate::hardgen::{unique_structures, TripartiteInstance, UniqueStructure};
use crate::witness::{
    chargeable_gates, covering_intervals, disjoint_subfamily, induced_union_witness, trim_circuit,
    EvaluatedWitness, RowClass, WitnessCircuit,
};

/// Chargeable gates of one `(a, K)` pair, as row classes of the witness
/// gates they come from.
pub(crate) struct PairCharge {
    pub classes: Vec<RowClass>,
    pub descendant_violations: usize,
}

/// Chargeable gates of the first induced union witness for `(a, K)`.
pub(crate) fn charge_pair(
    ew: &EvaluatedWitness,
    inst: &TripartiteInstance,
    us: &UniqueStructure,
    k: ColumnInterval,
    threshold: usize,
) -> Result<PairCharge> {
    let u = induced_union_witness(ew, inst, us.a(), k)?;
    let trim = trim_circuit(&u);
    let charge = chargeable_gates(&u, &trim, &us.beta_prime(k), threshold);
    let classes = charge
        .gates
        .iter()
        .filter_map(|&g| u.source(g).and_then(|id| ew.class_of(id)))
        .collect();
    Ok(PairCharge {
        classes,
        descendant_violations: charge.bound_violations(threshold).len(),
    })
}

/// Pairwise independent `(a, K)` pairs: for each row, a disjoint family of
/// the intervals it is computed on.
pub fn independent_pairs(ew: &EvaluatedWitness, inst: &TripartiteInstance) -> Vec<(usize, ColumnInterval)> {
    (0..inst.n_a())
        .flat_map(|a| {
            disjoint_subfamily(&covering_intervals(ew, inst, a))
                .into_iter()
                .map(move |k| (a, k))
        })
        .collect()
}

/// How many classes are shared by exactly `t` chargeable gates, for each `t`.
pub fn sharing_histogram<'a>(classes: impl IntoIterator<Item = &'a RowClass>) -> BTreeMap<usize, usize> {
    let mut counts: FxHashMap<&RowClass, usize> = FxHashMap::default();
    for c in classes {
        *counts.entry(c).or_default() += 1;
    }
    let mut hist = BTreeMap::new();
    for t in counts.into_values() {
        *hist.entry(t).or_default() += 1;
    }
    hist
}

/// Measures how often chargeable gates of independent `(a, K)` pairs share
/// a row class, against `c1 · log₂ n` per class on average.
pub fn reuse_audit(w: &WitnessCircuit, inst: &TripartiteInstance, params: &AuditParams) -> Result<AuditReport> {
    params.validate()?;
    let structures = unique_structures(inst)?;
    let ew = EvaluatedWitness::new(w.clone(), inst)?;
    let n = inst.n();
    let threshold = params.c0 * ceil_log2(n);
    let pairs = independent_pairs(&ew, inst);
    let charges: Vec<PairCharge> = pairs
        .par_iter()
        .map(|&(a, k)| charge_pair(&ew, inst, &structures[a], k, threshold))
        .collect::<Result<_>>()?;

    let all: Vec<&RowClass> = charges.iter().flat_map(|c| &c.classes).collect();
    let histogram = sharing_histogram(all.iter().copied());
    let distinct: usize = histogram.values().sum();
    let ratio = if distinct == 0 { 0.0 } else { all.len() as f64 / distinct as f64 };
    let bound = params.c1 as f64 * (n as f64).log2();
    let violations: usize = charges.iter().map(|c| c.descendant_violations).sum();

    let mut report = AuditReport::new("reuse");
    report
        .measure("pairs", pairs.len() as f64)
        .measure("threshold", threshold as f64)
        .measure("chargeable_gates", all.len() as f64)
        .measure("distinct_classes", distinct as f64)
        .measure("gates_per_class", ratio)
        .measure("descendant_bound_violations", violations as f64)
        .bound("gates_per_class", bound);
    report.histogram = histogram;
    report.note("measured on the emitted witness only; the reuse bound quantifies over all circuits");
    if all.is_empty() {
        report.note("no chargeable gates at this threshold; the ratio is vacuous");
    }
    if violations > 0 {
        report.fail(Counterexample::Inequality {
            name: "chargeable descendants".into(),
            measured: violations as f64,
            bound: 0.0,
        });
    }
    if ratio > bound {
        report.fail(Counterexample::Inequality {
            name: "gates_per_class".into(),
            measured: ratio,
            bound,
        });
    }
    Ok(report)
}
