//! Empirical checks of graph properties and lower-bound inequalities on
//! concrete instances and witnesses.

mod density;
mod diversity;
mod helpful;
mod lemmas;
mod reuse;

use std::collections::BTreeMap;
use std::hash::Hasher;

use rustc_hash::FxHasher;
use serde::{Deserialize, Serialize};

pub use density::{density_check, random_density_config, DensityConfig};
pub use diversity::{diversity_certify, diversity_counterexample};
pub use helpful::{certify_unhelpful_minimal, helped_rows, helped_rows_by_definition, unhelpfulness_check};
pub use lemmas::{certify_for_lemmas, lemma_inequality_check};
pub use reuse::{independent_pairs, reuse_audit, sharing_histogram};

use crate::bits::ColumnInterval;
use crate::error::{Error, Result};
use crate::hardgen::TripartiteInstance;

/// Largest `n_B` for exhaustive diversity checks.
pub const DIVERSITY_EXHAUSTIVE_LIMIT: usize = 24;
/// Largest `n_B` for exhaustive unhelpfulness checks.
pub const UNHELPFUL_EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum AuditMode {
    Exhaustive,
    Sample { trials: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditParams {
    pub k: usize,
    pub l: usize,
    pub c: usize,
    pub d: usize,
    pub c0: usize,
    pub c1: usize,
    pub mode: AuditMode,
}

impl Default for AuditParams {
    fn default() -> Self {
        Self {
            k: 2,
            l: 2,
            c: 4,
            d: 4,
            c0: 20,
            c1: 7,
            mode: AuditMode::Exhaustive,
        }
    }
}

impl AuditParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("k", self.k),
            ("l", self.l),
            ("c", self.c),
            ("d", self.d),
            ("c0", self.c0),
            ("c1", self.c1),
        ];
        if let Some((name, _)) = named.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
        }
        validate_mode(self.mode)
    }
}

pub(crate) fn validate_mode(mode: AuditMode) -> Result<()> {
    match mode {
        AuditMode::Sample { trials: 0, .. } => Err(Error::InvalidParameter("trials must be at least 1".into())),
        _ => Ok(()),
    }
}

pub(crate) fn validate_kl(k: usize, l: usize) -> Result<()> {
    if k == 0 || l == 0 {
        return Err(Error::InvalidParameter("k and l must be at least 1".into()));
    }
    Ok(())
}

/// `⌈log₂ n⌉`, at least 1.
pub fn ceil_log2(n: usize) -> usize {
    (n.max(2) - 1).ilog2() as usize + 1
}

/// Identity of an instance's matrices, so certificates cannot be replayed
/// against a different instance.
pub fn fingerprint(inst: &TripartiteInstance) -> String {
    let mut h = FxHasher::default();
    for d in [inst.n_a(), inst.n_b(), inst.n_c()] {
        h.write_u64(d as u64);
    }
    for m in [inst.p(), inst.q()] {
        for row in m.rows() {
            for &w in row.words() {
                h.write_u64(w);
            }
        }
    }
    format!("{:016x}", h.finish())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Diverse,
    Unhelpful,
}

/// How a property was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Every candidate set was examined.
    Exhaustive,
    /// Implied by pairwise common neighbourhoods or degrees.
    Pairwise,
    /// No counterexample among random candidates; not a proof.
    Sampled,
}

/// A `(k, ℓ)` property established for one instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub property: Property,
    pub k: usize,
    pub l: usize,
    /// The interval for unhelpfulness; `None` for diversity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<ColumnInterval>,
    pub basis: Basis,
    pub instance: String,
}

impl Certificate {
    pub fn is_proof(&self) -> bool {
        self.basis != Basis::Sampled
    }

    /// Whether this certificate implies `(k, l)` of `property` on `interval`
    /// for `inst`. Both properties are monotone in `k` and `l`.
    pub fn implies(
        &self,
        inst_fp: &str,
        property: Property,
        k: usize,
        l: usize,
        interval: Option<ColumnInterval>,
    ) -> bool {
        self.is_proof()
            && self.instance == inst_fp
            && self.property == property
            && self.interval == interval
            && self.k <= k
            && self.l <= l
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Counterexample {
    /// `rows` (1-based) are all adjacent to every element of `set`.
    CommonNeighbourhood { set: Vec<usize>, rows: Vec<usize> },
    /// `set` is helpful on `interval` for each of `rows`.
    Helpful {
        interval: ColumnInterval,
        set: Vec<usize>,
        rows: Vec<usize>,
    },
    /// Intervals (1-based positions in the input list) that do not qualify.
    SparseIntervals { positions: Vec<usize> },
    /// An inequality that does not hold.
    Inequality { name: String, measured: f64, bound: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub check: String,
    pub pass: bool,
    pub measured: BTreeMap<String, f64>,
    pub bound: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub histogram: BTreeMap<usize, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl AuditReport {
    pub(crate) fn new(check: &str) -> Self {
        Self {
            check: check.to_string(),
            pass: true,
            measured: BTreeMap::new(),
            bound: BTreeMap::new(),
            counterexample: None,
            certificate: None,
            histogram: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn measure(&mut self, key: &str, value: impl Into<f64>) -> &mut Self {
        self.measured.insert(key.to_string(), value.into());
        self
    }

    pub(crate) fn bound(&mut self, key: &str, value: impl Into<f64>) -> &mut Self {
        self.bound.insert(key.to_string(), value.into());
        self
    }

    pub(crate) fn fail(&mut self, counterexample: Counterexample) {
        self.pass = false;
        if self.counterexample.is_none() {
            self.counterexample = Some(counterexample);
        }
    }

    pub(crate) fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }
}

/// 1-based positions of the set bits of a mask.
pub(crate) fn mask_members(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

/// Next mask with the same popcount (Gosper's hack); `None` past `limit`
/// bits.
pub(crate) fn next_combination(x: u64, limit: usize) -> Option<u64> {
    if x == 0 {
        return None;
    }
    let c = x & x.wrapping_neg();
    let r = x + c;
    let next = (((r ^ x) >> 2) / c) | r;
    (next >> limit == 0).then_some(next)
}
