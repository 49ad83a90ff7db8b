//! Tripartite instances `A - B - C` and the uniqueness structure of rows.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rtgraph::RtGraph;
use crate::bits::{BitVector, BooleanMatrix, ColumnInterval};
use crate::error::{Error, Result};
use crate::rng;

/// Q rows draw from streams offset by this so they never meet P's.
const Q_STREAM_BASE: u64 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Rs,
    Random,
    /// Matrices supplied directly by the caller.
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSource {
    pub kind: InstanceKind,
    /// Matching count of the generating graph (0 otherwise).
    pub m: usize,
    /// Progression-free set of the generating graph (empty otherwise).
    pub s: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_q: Option<f64>,
}

/// Provenance of a path `a_i - b_k - c_j`: `(i, j)` is an edge of matching
/// `k`. All indices 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Origin {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TripartiteInstance {
    p: BooleanMatrix,
    q: BooleanMatrix,
    origin: Option<Vec<Origin>>,
    sparsify_prob: f64,
    seed: u64,
    source: InstanceSource,
}

impl TripartiteInstance {
    /// Assembles an instance from parts, checking dimensions and that origin
    /// triples are in range and consistent with `q`.
    pub fn from_parts(
        p: BooleanMatrix,
        q: BooleanMatrix,
        origin: Option<Vec<Origin>>,
        sparsify_prob: f64,
        seed: u64,
        source: InstanceSource,
    ) -> Result<Self> {
        if p.n_cols() != q.n_rows() {
            return Err(Error::DimensionMismatch(format!(
                "P has {} columns but Q has {} rows",
                p.n_cols(),
                q.n_rows()
            )));
        }
        check_prob(sparsify_prob)?;
        if let Some(triples) = &origin {
            for t in triples {
                if t.i >= p.n_rows() || t.k >= q.n_rows() || t.j >= q.n_cols() {
                    return Err(Error::DimensionMismatch(format!(
                        "origin triple ({}, {}, {}) out of range",
                        t.i + 1,
                        t.j + 1,
                        t.k + 1
                    )));
                }
                if !q.get(t.k, t.j) {
                    return Err(Error::Parse(format!(
                        "origin triple ({}, {}, {}) has no edge b-c in Q",
                        t.i + 1,
                        t.j + 1,
                        t.k + 1
                    )));
                }
            }
        }
        Ok(Self {
            p,
            q,
            origin,
            sparsify_prob,
            seed,
            source,
        })
    }

    /// An instance over caller-supplied matrices, without origin data.
    pub fn from_matrices(p: BooleanMatrix, q: BooleanMatrix) -> Result<Self> {
        let source = InstanceSource {
            kind: InstanceKind::Explicit,
            m: 0,
            s: Vec::new(),
            density_p: None,
            density_q: None,
        };
        Self::from_parts(p, q, None, 0.0, 0, source)
    }

    pub fn n_a(&self) -> usize {
        self.p.n_rows()
    }

    pub fn n_b(&self) -> usize {
        self.q.n_rows()
    }

    pub fn n_c(&self) -> usize {
        self.q.n_cols()
    }

    /// The A-B adjacency actually used (sparsified if `sparsify_prob > 0`).
    pub fn p(&self) -> &BooleanMatrix {
        &self.p
    }

    pub fn q(&self) -> &BooleanMatrix {
        &self.q
    }

    pub fn origin(&self) -> Option<&[Origin]> {
        self.origin.as_deref()
    }

    pub fn sparsify_prob(&self) -> f64 {
        self.sparsify_prob
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn source(&self) -> &InstanceSource {
        &self.source
    }

    /// `Γ_B(a)` in the instance's own P.
    pub fn neighbors(&self, a: usize) -> &BitVector {
        self.p.row(a)
    }

    /// Largest of the three part sizes.
    pub fn n(&self) -> usize {
        self.n_a().max(self.n_b()).max(self.n_c())
    }

    /// The A-B adjacency before sparsification, rebuilt from origin data.
    pub fn unsparsified_p(&self) -> Result<BooleanMatrix> {
        let triples = self.origin.as_ref().ok_or(Error::MissingOrigin)?;
        let mut p = BooleanMatrix::zeros(self.n_a(), self.n_b());
        for t in triples {
            p.set(t.i, t.k, true);
        }
        Ok(p)
    }
}

fn check_prob(prob: f64) -> Result<()> {
    if (0.0..=1.0).contains(&prob) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("probability {prob} outside [0, 1]")))
    }
}

/// The tripartite graph of `g`, with each A-B edge then removed
/// independently with probability `sparsify_prob`.
pub fn build_instance(g: &RtGraph, sparsify_prob: f64, seed: u64) -> Result<TripartiteInstance> {
    check_prob(sparsify_prob)?;
    let mut p = BooleanMatrix::zeros(g.left_size(), g.m());
    let mut q = BooleanMatrix::zeros(g.m(), g.right_size());
    let mut origin = Vec::with_capacity(g.edge_count());
    for (k, mk) in g.matchings.iter().enumerate() {
        for &(u, v) in mk {
            p.set(u - 1, k, true);
            q.set(k, v - 1, true);
            origin.push(Origin { i: u - 1, j: v - 1, k });
        }
    }
    origin.sort_unstable();
    if sparsify_prob > 0.0 {
        for i in 0..p.n_rows() {
            let ones: Vec<usize> = p.row(i).iter_ones().collect();
            for k in ones {
                if rng::entry_uniform(seed, i, k) < sparsify_prob {
                    p.set(i, k, false);
                }
            }
        }
    }
    let source = InstanceSource {
        kind: InstanceKind::Rs,
        m: g.m(),
        s: g.s().elements().to_vec(),
        density_p: None,
        density_q: None,
    };
    TripartiteInstance::from_parts(p, q, Some(origin), sparsify_prob, seed, source)
}

fn bernoulli_row(seed: u64, stream: u64, len: usize, density: f64) -> BitVector {
    let mut rng = rng::stream(seed, stream);
    BitVector::from_bools((0..len).map(|_| rng.random::<f64>() < density))
}

/// Independent Bernoulli entries: P with density `dp`, Q with `dq`. Each row
/// has its own stream.
pub fn random_instance(
    n_a: usize,
    n_b: usize,
    n_c: usize,
    dp: f64,
    dq: f64,
    seed: u64,
) -> Result<TripartiteInstance> {
    check_prob(dp)?;
    check_prob(dq)?;
    let p_rows = (0..n_a).map(|i| bernoulli_row(seed, i as u64, n_b, dp)).collect();
    let q_rows = (0..n_b)
        .map(|k| bernoulli_row(seed, Q_STREAM_BASE + k as u64, n_c, dq))
        .collect();
    let source = InstanceSource {
        kind: InstanceKind::Random,
        m: 0,
        s: Vec::new(),
        density_p: Some(dp),
        density_q: Some(dq),
    };
    TripartiteInstance::from_parts(
        BooleanMatrix::from_rows(n_b, p_rows)?,
        BooleanMatrix::from_rows(n_c, q_rows)?,
        None,
        0.0,
        seed,
        source,
    )
}

/// A random instance with the same part sizes and the same fraction of ones
/// in P and in Q as `inst`.
pub fn density_matched_random(inst: &TripartiteInstance, seed: u64) -> Result<TripartiteInstance> {
    let density = |m: &BooleanMatrix| {
        let area = m.n_rows() * m.n_cols();
        if area == 0 {
            0.0
        } else {
            m.count_ones() as f64 / area as f64
        }
    };
    random_instance(
        inst.n_a(),
        inst.n_b(),
        inst.n_c(),
        density(inst.p()),
        density(inst.q()),
        seed,
    )
}

/// Columns that are unique for one row `a` of G, and where they point in B.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniqueStructure {
    a: usize,
    /// `C[a]` as a bitvector over C.
    unique: BitVector,
    /// `beta[c]` for unique `c` (0-based), `usize::MAX` elsewhere.
    beta: Vec<usize>,
    /// `Γ_B(a)` in the sparsified graph.
    surviving: BitVector,
}

impl UniqueStructure {
    pub fn a(&self) -> usize {
        self.a
    }

    pub fn unique_columns(&self) -> &BitVector {
        &self.unique
    }

    /// The unique path's middle vertex for a unique column `c` (0-based).
    pub fn beta(&self, c: usize) -> Option<usize> {
        self.beta.get(c).copied().filter(|&b| b != usize::MAX)
    }

    /// `{beta(c) : c ∈ cols ∩ C[a]}` over B.
    pub fn beta_of(&self, cols: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.surviving.len());
        for c in cols.and(&self.unique).iter_ones() {
            out.set(self.beta[c], true);
        }
        out
    }

    /// Mirrors in B of the unique columns inside `k` whose edge to `a`
    /// survived sparsification.
    pub fn beta_prime(&self, k: ColumnInterval) -> BitVector {
        let mut out = BitVector::zeros(self.surviving.len());
        for c in self.unique.iter_ones().filter(|&c| k.contains_index(c)) {
            let b = self.beta[c];
            if self.surviving.get(b) {
                out.set(b, true);
            }
        }
        out
    }

    /// Unique columns inside `k`.
    pub fn unique_in(&self, k: ColumnInterval) -> impl Iterator<Item = usize> + '_ {
        self.unique.iter_ones().filter(move |&c| k.contains_index(c))
    }
}

fn structure_for(inst: &TripartiteInstance, g_p: &BooleanMatrix, a: usize) -> UniqueStructure {
    let n_c = inst.n_c();
    let mut once = BitVector::zeros(n_c);
    let mut twice = BitVector::zeros(n_c);
    for b in g_p.row(a).iter_ones() {
        let qb = inst.q().row(b);
        twice.or_assign(&once.and(qb));
        once.or_assign(qb);
    }
    let unique = once.and_not(&twice);
    let mut beta = vec![usize::MAX; n_c];
    for b in g_p.row(a).iter_ones() {
        for c in inst.q().row(b).and(&unique).iter_ones() {
            beta[c] = b;
        }
    }
    UniqueStructure {
        a,
        unique,
        beta,
        surviving: inst.neighbors(a).clone(),
    }
}

/// Uniqueness is measured in the unsparsified graph; survival in the
/// instance's own P.
pub fn unique_structure(inst: &TripartiteInstance, a: usize) -> Result<UniqueStructure> {
    if a >= inst.n_a() {
        return Err(Error::InvalidParameter(format!("row {a} out of range")));
    }
    let g_p = inst.unsparsified_p()?;
    Ok(structure_for(inst, &g_p, a))
}

/// [`unique_structure`] for every row.
pub fn unique_structures(inst: &TripartiteInstance) -> Result<Vec<UniqueStructure>> {
    let g_p = inst.unsparsified_p()?;
    Ok((0..inst.n_a()).map(|a| structure_for(inst, &g_p, a)).collect())
}
