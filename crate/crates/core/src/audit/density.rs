use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AuditReport, Counterexample};
use crate::bits::ColumnInterval;
use crate::error::{Error, Result};
use crate::rng::stream;

/// Intervals `K_i` of `[1..n]` and distinct elements `u_i ∈ K_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityConfig {
    pub n: usize,
    pub intervals: Vec<ColumnInterval>,
    pub elements: Vec<usize>,
}

/// A random valid configuration with `r` intervals over `[1..n]`.
pub fn random_density_config(n: usize, r: usize, seed: u64) -> Result<DensityConfig> {
    if n == 0 || r == 0 || r > n {
        return Err(Error::InvalidParameter(format!("need 1 <= r <= n, got r = {r}, n = {n}")));
    }
    let mut rng = stream(seed, 0);
    let elements: Vec<usize> = sample(&mut rng, n, r).into_iter().map(|u| u + 1).collect();
    let intervals = elements
        .iter()
        .map(|&u| {
            let lo = rng.random_range(1..=u);
            let hi = rng.random_range(u..=n);
            ColumnInterval::new(lo, hi)
        })
        .collect::<Result<_>>()?;
    Ok(DensityConfig { n, intervals, elements })
}

/// Counts intervals with `|K_i ∩ U| >= |K_i| r / 4n`; passes iff at least
/// `r / 2` of them qualify.
pub fn density_check(intervals: &[ColumnInterval], elements: &[usize], n: usize) -> Result<AuditReport> {
    let r = elements.len();
    if r == 0 || intervals.len() != r {
        return Err(Error::InvalidParameter(format!(
            "need one element per interval, got {} intervals and {r} elements",
            intervals.len()
        )));
    }
    let mut sorted = elements.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("elements must be distinct".into()));
    }
    for (i, (k, &u)) in intervals.iter().zip(elements).enumerate() {
        if k.hi() > n {
            return Err(Error::IntervalOutOfRange {
                lo: k.lo(),
                hi: k.hi(),
                n,
            });
        }
        if !k.contains(u) {
            return Err(Error::InvalidParameter(format!("element {u} is not in interval {} ({k})", i + 1)));
        }
    }

    let hits = |k: &ColumnInterval| sorted.partition_point(|&u| u <= k.hi()) - sorted.partition_point(|&u| u < k.lo());
    let sparse: Vec<usize> = intervals
        .iter()
        .enumerate()
        .filter(|(_, k)| 4 * n * hits(k) < k.len() * r)
        .map(|(i, _)| i + 1)
        .collect();
    let count = r - sparse.len();
    let mut report = AuditReport::new("density");
    report
        .measure("n", n as f64)
        .measure("r", r as f64)
        .measure("qualifying", count as f64)
        .bound("qualifying", r as f64 / 2.0);
    if 2 * count < r {
        report.fail(Counterexample::SparseIntervals { positions: sparse });
    }
    Ok(report)
}
