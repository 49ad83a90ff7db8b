use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use super::{
    fingerprint, mask_members, validate_kl, validate_mode, AuditMode, AuditReport, Basis, Certificate,
    Counterexample, Property, UNHELPFUL_EXHAUSTIVE_LIMIT,
};
use crate::bits::{BitVector, ColumnInterval};
use crate::error::{Error, Result};
use crate::hardgen::{unique_structures, TripartiteInstance, UniqueStructure};
use crate::rng::stream;

/// Trials used when exhaustive mode is requested above the size limit.
const FALLBACK_TRIALS: usize = 10_000;

/// One row's unique columns inside K, packed over the compressed columns.
struct RowHelp {
    a: usize,
    /// `β′_a(K)`, ascending.
    partners: Vec<usize>,
    /// Unique columns whose partner lost its edge to `a`; `Q_S` must be 0
    /// on them.
    forbidden: Vec<u64>,
    /// Unique columns of each partner.
    parts: Vec<Vec<u64>>,
}

impl RowHelp {
    fn capacity(&self) -> usize {
        self.partners.len()
    }

    /// Whether a set of size `size` with restricted union `v` is helpful.
    /// Each partner's membership in `S′` is pinned by `v` on its unique
    /// columns; `S′` exists iff those pins agree and it is large enough.
    fn helped(&self, v: &[u64], size: usize) -> bool {
        if self.capacity() < size || v.iter().zip(&self.forbidden).any(|(x, f)| x & f != 0) {
            return false;
        }
        let mut forced = 0;
        for part in &self.parts {
            let mut hit = false;
            let mut full = true;
            for (x, p) in v.iter().zip(part) {
                hit |= x & p != 0;
                full &= x & p == *p;
            }
            if hit && !full {
                return false;
            }
            forced += usize::from(full);
        }
        forced >= size
    }
}

struct HelpContext {
    /// Original 0-based column of each compressed column.
    cols: Vec<usize>,
    words: usize,
    rows: Vec<RowHelp>,
}

fn pack(cols: &[usize], index: &[usize], words: usize) -> Vec<u64> {
    let mut out = vec![0u64; words];
    for &c in cols {
        let i = index[c];
        out[i / 64] |= 1 << (i % 64);
    }
    out
}

impl HelpContext {
    fn new(inst: &TripartiteInstance, structures: &[UniqueStructure], k: ColumnInterval) -> Self {
        let mut relevant = BitVector::zeros(inst.n_c());
        for us in structures {
            for c in us.unique_in(k) {
                relevant.set(c, true);
            }
        }
        let cols: Vec<usize> = relevant.iter_ones().collect();
        let mut index = vec![usize::MAX; inst.n_c()];
        for (i, &c) in cols.iter().enumerate() {
            index[c] = i;
        }
        let words = cols.len().div_ceil(64).max(1);
        let rows = structures
            .iter()
            .map(|us| {
                let beta_prime = us.beta_prime(k);
                let mut forbidden = Vec::new();
                let mut by_partner: Vec<Vec<usize>> = vec![Vec::new(); inst.n_b()];
                for c in us.unique_in(k) {
                    match us.beta(c) {
                        Some(b) if beta_prime.get(b) => by_partner[b].push(c),
                        _ => forbidden.push(c),
                    }
                }
                let partners: Vec<usize> = beta_prime.iter_ones().collect();
                RowHelp {
                    a: us.a(),
                    forbidden: pack(&forbidden, &index, words),
                    parts: partners.iter().map(|&b| pack(&by_partner[b], &index, words)).collect(),
                    partners,
                }
            })
            .collect();
        Self { cols, words, rows }
    }

    fn restricted(&self, v: &BitVector) -> Vec<u64> {
        let mut out = vec![0u64; self.words];
        for (i, &c) in self.cols.iter().enumerate() {
            if v.get(c) {
                out[i / 64] |= 1 << (i % 64);
            }
        }
        out
    }

    fn helped(&self, v: &[u64], size: usize) -> Vec<usize> {
        self.rows.iter().filter(|r| r.helped(v, size)).map(|r| r.a).collect()
    }
}

fn check_interval(inst: &TripartiteInstance, k: ColumnInterval) -> Result<()> {
    if k.hi() > inst.n_c() {
        return Err(Error::IntervalOutOfRange {
            lo: k.lo(),
            hi: k.hi(),
            n: inst.n_c(),
        });
    }
    Ok(())
}

/// Rows `a` (0-based) for which `set` is helpful on `k`, decided by the
/// forced-set argument.
pub fn helped_rows(inst: &TripartiteInstance, k: ColumnInterval, set: &BitVector) -> Result<Vec<usize>> {
    check_interval(inst, k)?;
    let ctx = HelpContext::new(inst, &unique_structures(inst)?, k);
    let v = inst.q().or_rows(set);
    Ok(ctx.helped(&ctx.restricted(&v), set.count_ones()))
}

/// [`helped_rows`] straight from the definition: tries every `S′ ⊆ β′_a(K)`.
/// Exponential in `|β′_a(K)|`; meant for tiny instances.
pub fn helped_rows_by_definition(
    inst: &TripartiteInstance,
    k: ColumnInterval,
    set: &BitVector,
) -> Result<Vec<usize>> {
    check_interval(inst, k)?;
    let v = inst.q().or_rows(set);
    let mut out = Vec::new();
    for us in &unique_structures(inst)? {
        let window = BitVector::from_indices(inst.n_c(), us.unique_in(k));
        let target = v.and(&window);
        let partners: Vec<usize> = us.beta_prime(k).iter_ones().collect();
        if partners.len() > 24 {
            return Err(Error::InvalidParameter("too many partners to enumerate".into()));
        }
        let found = (0u64..1 << partners.len()).any(|m| {
            if (m.count_ones() as usize) < set.count_ones() {
                return false;
            }
            let chosen = partners.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &b)| b);
            let s2 = BitVector::from_indices(inst.n_b(), chosen);
            inst.q().or_rows(&s2).and(&window) == target
        });
        if found {
            out.push(us.a());
        }
    }
    Ok(out)
}

struct Violation {
    /// Orders violations: the mask in exhaustive scans, the trial otherwise.
    key: u64,
    set: Vec<usize>,
    rows: Vec<usize>,
}

#[derive(Default)]
struct Scan {
    max_helped: usize,
    sets: u64,
    violation: Option<Violation>,
}

impl Scan {
    fn merge(self, other: Scan) -> Scan {
        Scan {
            max_helped: self.max_helped.max(other.max_helped),
            sets: self.sets + other.sets,
            violation: match (self.violation, other.violation) {
                (Some(x), Some(y)) => Some(if x.key <= y.key { x } else { y }),
                (x, y) => x.or(y),
            },
        }
    }

    fn record(&mut self, key: u64, set: impl FnOnce() -> Vec<usize>, helped: Vec<usize>, k: usize) {
        self.max_helped = self.max_helped.max(helped.len());
        if helped.len() > k && self.violation.as_ref().is_none_or(|v| key < v.key) {
            self.violation = Some(Violation {
                key,
                set: set(),
                rows: helped.iter().map(|a| a + 1).collect(),
            });
        }
    }
}

/// Every `S` with `|S| >= l`. Unions come from two half tables over the low
/// and high bits of the mask.
fn exhaustive_scan(inst: &TripartiteInstance, ctx: &HelpContext, k: usize, l: usize) -> Scan {
    let n_b = inst.n_b();
    let qc: Vec<Vec<u64>> = (0..n_b).map(|b| ctx.restricted(inst.q().row(b))).collect();
    let half = n_b / 2;
    let table = |first: usize, bits: usize| -> Vec<Vec<u64>> {
        let mut t = vec![vec![0u64; ctx.words]; 1 << bits];
        for m in 1usize..1 << bits {
            let low = m.trailing_zeros() as usize;
            t[m] = t[m & (m - 1)].iter().zip(&qc[first + low]).map(|(x, y)| x | y).collect();
        }
        t
    };
    let low = table(0, half);
    let high = table(half, n_b - half);
    let low_mask = (1u64 << half) - 1;
    let rows: Vec<&RowHelp> = ctx.rows.iter().filter(|r| r.capacity() >= l).collect();
    let max_capacity = rows.iter().map(|r| r.capacity()).max().unwrap_or(0);

    (0u64..1 << n_b)
        .into_par_iter()
        .filter(|m| m.count_ones() as usize >= l)
        .fold(Scan::default, |mut acc, m| {
            acc.sets += 1;
            let size = m.count_ones() as usize;
            if size > max_capacity {
                return acc;
            }
            let v: Vec<u64> = low[(m & low_mask) as usize]
                .iter()
                .zip(&high[(m >> half) as usize])
                .map(|(x, y)| x | y)
                .collect();
            let helped: Vec<usize> = rows.iter().filter(|r| r.helped(&v, size)).map(|r| r.a).collect();
            acc.record(m, || mask_members(m), helped, k);
            acc
        })
        .reduce(Scan::default, Scan::merge)
}

/// Random sets of size at least `l`. Even trials draw a subset of some row's
/// partners, which that row is always helped by; odd trials draw uniformly.
fn sampled_scan(inst: &TripartiteInstance, ctx: &HelpContext, k: usize, l: usize, trials: usize, seed: u64) -> Scan {
    let n_b = inst.n_b();
    let heavy: Vec<&RowHelp> = ctx.rows.iter().filter(|r| r.capacity() >= l).collect();
    let mut rng = stream(seed, 1);
    let mut scan = Scan::default();
    if l > n_b {
        return scan;
    }
    for t in 0..trials {
        let members: Vec<usize> = match heavy.len() {
            h if t % 2 == 0 && h > 0 => {
                let partners = &heavy[rng.random_range(0..h)].partners;
                let size = rng.random_range(l..=partners.len());
                sample(&mut rng, partners.len(), size).into_iter().map(|j| partners[j]).collect()
            }
            _ => {
                let size = rng.random_range(l..=n_b);
                sample(&mut rng, n_b, size).into_vec()
            }
        };
        let set = BitVector::from_indices(n_b, members);
        scan.sets += 1;
        let v = ctx.restricted(&inst.q().or_rows(&set));
        let helped = ctx.helped(&v, set.count_ones());
        scan.record(t as u64, || set.iter_ones().map(|b| b + 1).collect(), helped, k);
    }
    scan
}

/// Checks that every `S ⊆ B` with `|S| >= l` is helpful on `k_interval`
/// for at most `k` rows.
pub fn unhelpfulness_check(
    inst: &TripartiteInstance,
    k_interval: ColumnInterval,
    k: usize,
    l: usize,
    mode: AuditMode,
) -> Result<AuditReport> {
    validate_kl(k, l)?;
    validate_mode(mode)?;
    check_interval(inst, k_interval)?;
    let structures = unique_structures(inst)?;
    let ctx = HelpContext::new(inst, &structures, k_interval);
    let mut report = AuditReport::new("unhelpfulness");
    report
        .measure("n_a", inst.n_a() as f64)
        .measure("n_b", inst.n_b() as f64)
        .measure("interval_lo", k_interval.lo() as f64)
        .measure("interval_hi", k_interval.hi() as f64)
        .bound("k", k as f64)
        .bound("l", l as f64);
    let candidates = ctx.rows.iter().filter(|r| r.capacity() >= l).count();
    report.measure("rows_with_l_partners", candidates as f64);

    let (scan, basis) = if candidates <= k {
        report.note("at most k rows have l surviving unique partners in K; no set can help more than k rows");
        (Scan::default(), Basis::Exhaustive)
    } else {
        match mode {
            AuditMode::Exhaustive if inst.n_b() <= UNHELPFUL_EXHAUSTIVE_LIMIT => {
                (exhaustive_scan(inst, &ctx, k, l), Basis::Exhaustive)
            }
            AuditMode::Exhaustive => {
                report.note(format!(
                    "n_B > {UNHELPFUL_EXHAUSTIVE_LIMIT}: exhaustive enumeration replaced by {FALLBACK_TRIALS} samples"
                ));
                (sampled_scan(inst, &ctx, k, l, FALLBACK_TRIALS, 0), Basis::Sampled)
            }
            AuditMode::Sample { trials, seed } => (sampled_scan(inst, &ctx, k, l, trials, seed), Basis::Sampled),
        }
    };
    report
        .measure("sets_checked", scan.sets as f64)
        .measure("max_helped", scan.max_helped as f64);
    match scan.violation {
        Some(v) => report.fail(Counterexample::Helpful {
            interval: k_interval,
            set: v.set,
            rows: v.rows,
        }),
        None => {
            if basis == Basis::Sampled {
                report.note(format!(
                    "no violation in {} sampled sets: with 95% confidence fewer than {:.2e} of the sampled distribution violates",
                    scan.sets,
                    3.0 / scan.sets.max(1) as f64
                ));
            }
            report.certificate = Some(Certificate {
                property: Property::Unhelpful,
                k,
                l,
                interval: Some(k_interval),
                basis,
                instance: fingerprint(inst),
            });
        }
    }
    Ok(report)
}

/// Exhaustively finds the smallest `k` for which the instance is
/// `(k, l)`-unhelpful on `k_interval` and certifies it.
pub fn certify_unhelpful_minimal(
    inst: &TripartiteInstance,
    k_interval: ColumnInterval,
    l: usize,
) -> Result<Certificate> {
    validate_kl(1, l)?;
    check_interval(inst, k_interval)?;
    let structures = unique_structures(inst)?;
    let ctx = HelpContext::new(inst, &structures, k_interval);
    let candidates = ctx.rows.iter().filter(|r| r.capacity() >= l).count();
    let k = if candidates <= 1 {
        1
    } else {
        if inst.n_b() > UNHELPFUL_EXHAUSTIVE_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "exhaustive unhelpfulness check needs n_B <= {UNHELPFUL_EXHAUSTIVE_LIMIT}, got {}",
                inst.n_b()
            )));
        }
        exhaustive_scan(inst, &ctx, usize::MAX, l).max_helped.max(1)
    };
    Ok(Certificate {
        property: Property::Unhelpful,
        k,
        l,
        interval: Some(k_interval),
        basis: Basis::Exhaustive,
        instance: fingerprint(inst),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardgen::{
        ap_free_set, build_instance, build_rt_graph, random_instance, rs_family, ApFreeSet, ApMethod,
    };

    fn example(prob: f64, seed: u64) -> TripartiteInstance {
        let g = build_rt_graph(3, ApFreeSet::from_elements(3, vec![1, 2]).unwrap()).unwrap();
        build_instance(&g, prob, seed).unwrap()
    }

    /// Double enumeration over all `S` and all `S′`: the largest number of
    /// rows any `S` with `|S| >= l` is helpful for.
    fn brute_max_helped(inst: &TripartiteInstance, k: ColumnInterval, l: usize) -> usize {
        let n_b = inst.n_b();
        (0u64..1 << n_b)
            .filter(|m| m.count_ones() as usize >= l)
            .map(|m| {
                let set = BitVector::from_indices(n_b, (0..n_b).filter(|b| m >> b & 1 == 1));
                helped_rows_by_definition(inst, k, &set).unwrap().len()
            })
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn small_capacity_rows_are_never_helped() {
        let inst = example(0.0, 0);
        let k = ColumnInterval::full(inst.n_c());
        let structures = unique_structures(&inst).unwrap();
        for l in 1..=inst.n_b() {
            for m in 1u64..1 << inst.n_b() {
                if (m.count_ones() as usize) < l {
                    continue;
                }
                let set = BitVector::from_indices(inst.n_b(), (0..inst.n_b()).filter(|b| m >> b & 1 == 1));
                for a in helped_rows(&inst, k, &set).unwrap() {
                    assert!(structures[a].beta_prime(k).count_ones() >= set.count_ones());
                }
            }
        }
    }

    #[test]
    fn forced_set_matches_definition_on_tiny_instances() {
        let mut checked = 0;
        for seed in 0..20 {
            let inst = example(0.3, seed);
            assert!(inst.n_b() <= 6);
            for (lo, hi) in [(1, 7), (2, 5), (3, 3), (4, 7)] {
                let k = ColumnInterval::new(lo, hi).unwrap();
                for m in 0u64..1 << inst.n_b() {
                    let set = BitVector::from_indices(inst.n_b(), (0..inst.n_b()).filter(|b| m >> b & 1 == 1));
                    assert_eq!(
                        helped_rows(&inst, k, &set).unwrap(),
                        helped_rows_by_definition(&inst, k, &set).unwrap()
                    );
                    checked += 1;
                }
            }
        }
        assert!(checked > 500);
    }

    #[test]
    fn exhaustive_mode_matches_double_enumeration() {
        for seed in 0..10 {
            let g = build_rt_graph(6, ap_free_set(6, ApMethod::Greedy).unwrap()).unwrap();
            let inst = build_instance(&g, 0.4, seed).unwrap();
            assert!(inst.n_b() <= 6);
            for k_int in [ColumnInterval::full(inst.n_c()), ColumnInterval::new(3, 9).unwrap()] {
                for l in 1..4 {
                    let truth = brute_max_helped(&inst, k_int, l);
                    for k in 1..4 {
                        let r = unhelpfulness_check(&inst, k_int, k, l, AuditMode::Exhaustive).unwrap();
                        assert_eq!(r.pass, truth <= k, "seed {seed} {k_int} k {k} l {l}");
                        if let Some(Counterexample::Helpful { set, rows, .. }) = &r.counterexample {
                            assert!(set.len() >= l && rows.len() > k);
                        }
                    }
                    let cert = certify_unhelpful_minimal(&inst, k_int, l).unwrap();
                    assert_eq!(cert.k, truth.max(1));
                }
            }
        }
    }

    #[test]
    fn random_instances_are_rejected() {
        let inst = random_instance(8, 8, 8, 0.5, 0.5, 1).unwrap();
        let r = unhelpfulness_check(&inst, ColumnInterval::full(8), 2, 2, AuditMode::Exhaustive);
        assert!(matches!(r, Err(Error::MissingOrigin)));
    }

    #[test]
    fn sampled_mode_on_rs_instance() {
        let inst = rs_family(48, 0.5, 3).unwrap();
        let k = ColumnInterval::full(inst.n_c());
        let r = unhelpfulness_check(&inst, k, 4, 3, AuditMode::Sample { trials: 10_000, seed: 9 }).unwrap();
        assert_eq!(r.measured["sets_checked"], 10_000.0);
        assert!(r.measured["max_helped"] >= 1.0);
        if r.pass {
            assert_eq!(r.certificate.as_ref().unwrap().basis, Basis::Sampled);
            assert!(!r.notes.is_empty());
        }
        let again = unhelpfulness_check(&inst, k, 4, 3, AuditMode::Sample { trials: 10_000, seed: 9 }).unwrap();
        assert_eq!(r, again);
    }
}
