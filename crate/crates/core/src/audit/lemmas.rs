use std::collections::BTreeSet;

use rayon::prelude::*;

use super::reuse::charge_pair;
use super::{
    ceil_log2, certify_unhelpful_minimal, diversity_certify, fingerprint, AuditMode, AuditParams, AuditReport,
    Certificate, Counterexample, Property,
};
use crate::bits::ColumnInterval;
use crate::error::{Error, Result};
use crate::hardgen::{unique_structures, TripartiteInstance, UniqueStructure};
use crate::witness::{
    cost_report, covering_intervals, validate_witness, EvaluatedWitness, GateKind, RowClass, WitnessCircuit,
};

/// Rows taking part in the per-interval count on `k`: those with at least
/// `2l` surviving unique partners in `k` and a union gate for `k`.
struct IntervalRows {
    k: ColumnInterval,
    rows: Vec<usize>,
}

fn interval_rows(
    ew: &EvaluatedWitness,
    inst: &TripartiteInstance,
    structures: &[UniqueStructure],
    l: usize,
) -> Vec<IntervalRows> {
    let mut by_k: std::collections::BTreeMap<ColumnInterval, Vec<usize>> = Default::default();
    for (a, us) in structures.iter().enumerate() {
        for k in covering_intervals(ew, inst, a) {
            if us.beta_prime(k).count_ones() >= 2 * l {
                by_k.entry(k).or_default().push(a);
            }
        }
    }
    by_k.into_iter().map(|(k, rows)| IntervalRows { k, rows }).collect()
}

fn is_union_only(w: &WitnessCircuit) -> bool {
    w.count(GateKind::Partition) == 0 && w.count(GateKind::Concat) == 0
}

fn lookup<'a>(
    certs: &'a [Certificate],
    fp: &str,
    property: Property,
    k: usize,
    l: usize,
    interval: Option<ColumnInterval>,
) -> Result<&'a Certificate> {
    certs
        .iter()
        .find(|c| c.implies(fp, property, k, l, interval))
        .ok_or_else(|| {
            let at = interval.map_or(String::new(), |k| format!(" on {k}"));
            Error::Uncertified(format!("no proof that the instance is {property:?} with ({k}, {l}){at}"))
        })
}

/// Smallest positive `|Q_b restricted to k|`.
fn min_positive_weight(inst: &TripartiteInstance, k: ColumnInterval) -> usize {
    (0..inst.n_b())
        .map(|b| inst.q().row(b).slice(k.start(), k.len()).count_ones())
        .filter(|&c| c > 0)
        .min()
        .unwrap_or(0)
}

/// Certificates for every premise [`lemma_inequality_check`] needs on this
/// witness: unhelpfulness at the smallest `k` that holds (on C for union-only
/// witnesses, on each interval with enough partners otherwise), and
/// diversity at `(c⌈log n⌉, d⌈log n⌉)` when it holds.
pub fn certify_for_lemmas(
    w: &WitnessCircuit,
    inst: &TripartiteInstance,
    params: &AuditParams,
) -> Result<Vec<Certificate>> {
    params.validate()?;
    let structures = unique_structures(inst)?;
    let ew = EvaluatedWitness::new(w.clone(), inst)?;
    let intervals: Vec<ColumnInterval> = if is_union_only(w) {
        vec![ColumnInterval::full(inst.n_c())]
    } else {
        interval_rows(&ew, inst, &structures, params.l)
            .into_iter()
            .map(|ir| ir.k)
            .collect()
    };
    let mut certs = intervals
        .into_par_iter()
        .map(|k| certify_unhelpful_minimal(inst, k, params.l))
        .collect::<Result<Vec<_>>>()?;
    let lg = ceil_log2(inst.n());
    let mode = if inst.n_b() <= super::DIVERSITY_EXHAUSTIVE_LIMIT {
        AuditMode::Exhaustive
    } else {
        params.mode
    };
    if let Some(c) = diversity_certify(inst, params.c * lg, params.d * lg, mode)?.certificate {
        certs.push(c);
    }
    Ok(certs)
}

/// Checks the counting cores of the lower-bound lemmas on a correct
/// witness:
///
/// * union-only witnesses: distinct row classes `>= m/(2kℓ) - n_A/k` with
///   `m = Σ_a |β′_a(C)|`, given `(k, ℓ)`-unhelpfulness on C;
/// * witnesses with partitions, per interval K: distinct classes of cost
///   `>= r_K` among `(a, K)`-chargeable gates `>= m_K/(4kℓ)`, given
///   `(k, ℓ)`-unhelpfulness on K;
/// * any witness: union gates `>= rℓ|L|/(2cd⌈log n⌉²)`, given
///   `(c⌈log n⌉, d⌈log n⌉)`-diversity, when `L` is non-empty.
///
/// The premises must be among `certs` as proofs.
pub fn lemma_inequality_check(
    w: &WitnessCircuit,
    inst: &TripartiteInstance,
    params: &AuditParams,
    certs: &[Certificate],
) -> Result<AuditReport> {
    params.validate()?;
    let structures = unique_structures(inst)?;
    if !validate_witness(w, inst)?.correct {
        return Err(Error::InvalidParameter("lemma checks need a correct witness".into()));
    }
    let ew = EvaluatedWitness::new(w.clone(), inst)?;
    let fp = fingerprint(inst);
    let (k, l) = (params.k, params.l);
    let mut report = AuditReport::new("lemmas");
    report.measure("n_a", inst.n_a() as f64).measure("n", inst.n() as f64);

    if is_union_only(w) {
        let full = ColumnInterval::full(inst.n_c());
        lookup(certs, &fp, Property::Unhelpful, k, l, Some(full))?;
        let m: usize = structures.iter().map(|us| us.beta_prime(full).count_ones()).sum();
        let distinct = cost_report(w, inst)?.distinct_class_count;
        let bound = m as f64 / (2 * k * l) as f64 - inst.n_a() as f64 / k as f64;
        report
            .measure("m", m as f64)
            .measure("distinct_classes", distinct as f64)
            .bound("distinct_classes", bound);
        if (distinct as f64) < bound {
            report.fail(Counterexample::Inequality {
                name: "union-only distinct classes".into(),
                measured: distinct as f64,
                bound,
            });
        }
    } else {
        let groups = interval_rows(&ew, inst, &structures, l);
        for g in &groups {
            lookup(certs, &fp, Property::Unhelpful, k, l, Some(g.k))?;
        }
        let per_interval = groups
            .par_iter()
            .map(|g| -> Result<(ColumnInterval, usize, usize, f64)> {
                let r = min_positive_weight(inst, g.k);
                let mut classes: BTreeSet<RowClass> = BTreeSet::new();
                let mut m = 0;
                for &a in &g.rows {
                    m += structures[a].beta_prime(g.k).count_ones();
                    let charge = charge_pair(&ew, inst, &structures[a], g.k, l)?;
                    classes.extend(charge.classes.into_iter().filter(|c| c.cost() >= r));
                }
                Ok((g.k, m, classes.len(), m as f64 / (4 * k * l) as f64))
            })
            .collect::<Result<Vec<_>>>()?;
        report.measure("partition_intervals", per_interval.len() as f64);
        let tightest = per_interval
            .iter()
            .min_by(|x, y| (x.2 as f64 - x.3).total_cmp(&(y.2 as f64 - y.3)));
        if let Some(&(kk, m, count, bound)) = tightest {
            report
                .measure("partition_tightest_lo", kk.lo() as f64)
                .measure("partition_tightest_hi", kk.hi() as f64)
                .measure("partition_m", m as f64)
                .measure("partition_classes", count as f64)
                .bound("partition_classes", bound);
        } else {
            report.note("partition version: no interval has a row with 2l surviving unique partners");
        }
        for &(kk, _, count, bound) in &per_interval {
            if (count as f64) < bound {
                report.fail(Counterexample::Inequality {
                    name: format!("partition classes on {kk}"),
                    measured: count as f64,
                    bound,
                });
            }
        }
    }

    // Many partitions.
    let lg = ceil_log2(inst.n());
    let r_min = params.d * lg;
    let spans: Vec<(usize, usize)> = (0..inst.n_a())
        .map(|a| (covering_intervals(&ew, inst, a).len(), inst.neighbors(a).count_ones()))
        .filter(|&(spans, deg)| spans >= l && deg >= r_min)
        .collect();
    let unions = w.count(GateKind::Union);
    report.measure("union_gates", unions as f64);
    if spans.is_empty() {
        report.note("many partitions: L is empty, not applicable");
    } else {
        lookup(certs, &fp, Property::Diverse, params.c * lg, params.d * lg, None)?;
        let denom = (2 * params.c * params.d * lg * lg) as f64;
        let (r, size, bound) = spans
            .iter()
            .map(|&(_, deg)| deg)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|r| {
                let size = spans.iter().filter(|&&(_, deg)| deg >= r).count();
                (r, size, (r * l * size) as f64 / denom)
            })
            .max_by(|x, y| x.2.total_cmp(&y.2))
            .unwrap_or((r_min, 0, 0.0));
        report
            .measure("many_partitions_r", r as f64)
            .measure("many_partitions_rows", size as f64)
            .bound("union_gates", bound);
        if (unions as f64) < bound {
            report.fail(Counterexample::Inequality {
                name: "many partitions union gates".into(),
                measured: unions as f64,
                bound,
            });
        }
    }
    Ok(report)
}
