use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use super::{
    fingerprint, mask_members, next_combination, validate_kl, validate_mode, AuditMode, AuditReport, Basis,
    Certificate, Counterexample, Property, DIVERSITY_EXHAUSTIVE_LIMIT,
};
use crate::error::{Error, Result};
use crate::hardgen::TripartiteInstance;
use crate::rng::stream;

/// Largest common neighbourhood over pairs of distinct rows, with the pair.
fn max_pairwise_common(inst: &TripartiteInstance) -> Option<(usize, usize, usize)> {
    (0..inst.n_a())
        .into_par_iter()
        .filter_map(|a| {
            let ga = inst.neighbors(a);
            (a + 1..inst.n_a())
                .map(|a2| (ga.and(inst.neighbors(a2)).count_ones(), a, a2))
                .max_by_key(|&(c, _, a2)| (c, std::cmp::Reverse(a2)))
        })
        .max_by_key(|&(c, a, a2)| (c, std::cmp::Reverse((a, a2))))
}

fn rows_containing(inst: &TripartiteInstance, set: &[usize]) -> Vec<usize> {
    (0..inst.n_a())
        .filter(|&a| set.iter().all(|&b| inst.neighbors(a).get(b)))
        .collect()
}

fn one_based(xs: &[usize]) -> Vec<usize> {
    xs.iter().map(|x| x + 1).collect()
}

/// Enumerates every `S ⊆ B` with `|S| = l` and returns the first one that is
/// fully adjacent to at least `k` rows.
pub fn diversity_counterexample(inst: &TripartiteInstance, k: usize, l: usize) -> Result<Option<Counterexample>> {
    validate_kl(k, l)?;
    let n_b = inst.n_b();
    if n_b > DIVERSITY_EXHAUSTIVE_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "exhaustive diversity check needs n_B <= {DIVERSITY_EXHAUSTIVE_LIMIT}, got {n_b}"
        )));
    }
    if l > n_b {
        return Ok(None);
    }
    let masks: Vec<(usize, u64)> = (0..inst.n_a())
        .filter(|&a| inst.neighbors(a).count_ones() >= l)
        .map(|a| (a, inst.neighbors(a).words().first().copied().unwrap_or(0)))
        .collect();
    if masks.len() < k {
        return Ok(None);
    }
    let mut s = (1u64 << l) - 1;
    loop {
        let rows: Vec<usize> = masks.iter().filter(|(_, m)| m & s == s).map(|&(a, _)| a + 1).collect();
        if rows.len() >= k {
            return Ok(Some(Counterexample::CommonNeighbourhood {
                set: mask_members(s),
                rows,
            }));
        }
        match next_combination(s, n_b) {
            Some(next) => s = next,
            None => return Ok(None),
        }
    }
}

/// Checks that no `l` columns of P are all set in `k` distinct rows.
///
/// Degrees and pairwise common neighbourhoods decide the cases `k = 1`,
/// `k = 2` and every case where no two rows share `l` neighbours; the rest
/// is enumerated or sampled according to `mode`.
pub fn diversity_certify(inst: &TripartiteInstance, k: usize, l: usize, mode: AuditMode) -> Result<AuditReport> {
    validate_kl(k, l)?;
    validate_mode(mode)?;
    if mode == AuditMode::Exhaustive && inst.n_b() > DIVERSITY_EXHAUSTIVE_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "exhaustive diversity check needs n_B <= {DIVERSITY_EXHAUSTIVE_LIMIT}, got {}",
            inst.n_b()
        )));
    }
    let mut report = AuditReport::new("diversity");
    report
        .measure("n_a", inst.n_a() as f64)
        .measure("n_b", inst.n_b() as f64)
        .bound("k", k as f64)
        .bound("l", l as f64);

    let (max_deg, arg_deg) = (0..inst.n_a())
        .map(|a| (inst.neighbors(a).count_ones(), a))
        .max_by_key(|&(d, a)| (d, std::cmp::Reverse(a)))
        .unwrap_or((0, 0));
    report.measure("max_degree", max_deg as f64);
    let pair = max_pairwise_common(inst);
    let max_common = pair.map_or(0, |p| p.0);
    report.measure("max_pairwise_common", max_common as f64);

    let certificate = |basis| Certificate {
        property: Property::Diverse,
        k,
        l,
        interval: None,
        basis,
        instance: fingerprint(inst),
    };

    if k == 1 {
        if max_deg >= l {
            let set: Vec<usize> = inst.neighbors(arg_deg).iter_ones().take(l).collect();
            report.fail(Counterexample::CommonNeighbourhood {
                set: one_based(&set),
                rows: vec![arg_deg + 1],
            });
        } else {
            report.certificate = Some(certificate(Basis::Pairwise));
        }
        return Ok(report);
    }
    if max_common < l {
        report.note("every pair of rows shares fewer than l columns, which implies (k, l) for all k >= 2");
        report.certificate = Some(certificate(Basis::Pairwise));
        return Ok(report);
    }
    if let (2, Some((_, a, a2))) = (k, pair) {
        let common = inst.neighbors(a).and(inst.neighbors(a2));
        let set: Vec<usize> = common.iter_ones().take(l).collect();
        report.fail(Counterexample::CommonNeighbourhood {
            set: one_based(&set),
            rows: vec![a + 1, a2 + 1],
        });
        return Ok(report);
    }

    match mode {
        AuditMode::Exhaustive => match diversity_counterexample(inst, k, l)? {
            Some(cx) => report.fail(cx),
            None => report.certificate = Some(certificate(Basis::Exhaustive)),
        },
        AuditMode::Sample { trials, seed } => {
            let heavy: Vec<usize> = (0..inst.n_a())
                .filter(|&a| inst.neighbors(a).count_ones() >= l)
                .collect();
            let mut rng = stream(seed, 0);
            let mut best = 0usize;
            for _ in 0..trials {
                let a = heavy[rng.random_range(0..heavy.len())];
                let gamma: Vec<usize> = inst.neighbors(a).iter_ones().collect();
                let mut set: Vec<usize> = sample(&mut rng, gamma.len(), l).into_iter().map(|i| gamma[i]).collect();
                set.sort_unstable();
                let rows = rows_containing(inst, &set);
                best = best.max(rows.len());
                if rows.len() >= k {
                    report.fail(Counterexample::CommonNeighbourhood {
                        set: one_based(&set),
                        rows: one_based(&rows),
                    });
                    break;
                }
            }
            report.measure("trials", trials as f64).measure("max_sampled_rows", best as f64);
            if report.pass {
                report.note("sampled subsets of single rows' neighbourhoods; absence of a counterexample is not a proof");
                report.certificate = Some(certificate(Basis::Sampled));
            }
        }
    }
    Ok(report)
}
