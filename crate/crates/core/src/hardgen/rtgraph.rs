//! Bipartite graphs whose edges split into pairwise disjoint induced
//! matchings, built from a progression-free set.
//!
//! Matching `M_x` (for `x` in `1..=m`) is `{(x + s, x + 2s) : s in S}` with
//! left vertices `1..=m + max S` and right vertices `1..=m + 2 max S`. A cross
//! edge `(x + s, x + 2s')` of another matching would force `2s' - s` into `S`,
//! which is a progression `s, s', 2s' - s`.

use rayon::prelude::*;
use rand::Rng;
use serde::Serialize;

use super::apfree::ApFreeSet;
use crate::error::{Error, Result};
use crate::rng;

/// Right-side sizes up to this are verified exhaustively.
pub const EXHAUSTIVE_RIGHT_LIMIT: usize = 2000;
/// Random cross-pair probes per matching in sampled verification.
pub const PROBES_PER_MATCHING: usize = 100_000;

const PROBE_SEED: u64 = 0x5eed_1d0c;

#[derive(Clone, Debug)]
pub struct RtGraph {
    m: usize,
    s: ApFreeSet,
    left_size: usize,
    right_size: usize,
    /// `matchings[x - 1]` holds `M_x` as 1-based `(left, right)` pairs.
    pub matchings: Vec<Vec<(usize, usize)>>,
    /// Graph edges outside every matching. Empty for constructed graphs.
    pub stray_edges: Vec<(usize, usize)>,
}

impl RtGraph {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> &ApFreeSet {
        &self.s
    }

    /// Matching size `r = |S|`.
    pub fn r(&self) -> usize {
        self.s.len()
    }

    pub fn left_size(&self) -> usize {
        self.left_size
    }

    pub fn right_size(&self) -> usize {
        self.right_size
    }

    pub fn edge_count(&self) -> usize {
        self.matchings.iter().map(Vec::len).sum::<usize>() + self.stray_edges.len()
    }

    fn all_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.matchings
            .iter()
            .flatten()
            .copied()
            .chain(self.stray_edges.iter().copied())
    }

    /// Sorted right neighbours of every left vertex (index 0 unused).
    fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.left_size + 1];
        for (u, v) in self.all_edges() {
            adj[u].push(v as u32);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }
}

pub fn build_rt_graph(m: usize, s: ApFreeSet) -> Result<RtGraph> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one matching".into()));
    }
    if s.is_empty() {
        return Err(Error::InvalidParameter("progression-free set is empty".into()));
    }
    if s.limit() > m {
        return Err(Error::InvalidParameter(format!(
            "set limit {} exceeds matching count {m}",
            s.limit()
        )));
    }
    let max = s.max();
    let matchings = (1..=m)
        .map(|x| s.elements().iter().map(|&e| (x + e, x + 2 * e)).collect())
        .collect();
    let g = RtGraph {
        m,
        left_size: m + max,
        right_size: m + 2 * max,
        s,
        matchings,
        stray_edges: Vec::new(),
    };
    match verify_induced_matchings(&g) {
        MatchingVerdict::Ok { .. } => Ok(g),
        MatchingVerdict::Violation(v) => Err(Error::Construction(format!(
            "matching M_{} is not induced or disjoint: edge ({}, {}) ({:?})",
            v.matching, v.edge.0, v.edge.1, v.kind
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// The edge belongs to two matchings, or a matching reuses a vertex.
    NotDisjoint,
    /// A graph edge joins two vertices of the matching but is not in it.
    NotInduced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MatchingViolation {
    /// 1-based matching index.
    pub matching: usize,
    pub edge: (usize, usize),
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchingVerdict {
    Ok { exhaustive: bool },
    Violation(MatchingViolation),
}

impl MatchingVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Self::Ok { .. })
    }
}

pub fn verify_induced_matchings(g: &RtGraph) -> MatchingVerdict {
    if let Some(v) = disjointness_violation(g) {
        return MatchingVerdict::Violation(v);
    }
    let adj = g.adjacency();
    let exhaustive = g.right_size <= EXHAUSTIVE_RIGHT_LIMIT;
    let found = g
        .matchings
        .par_iter()
        .enumerate()
        .find_map_first(|(idx, mk)| {
            if exhaustive {
                induced_exhaustive(&adj, idx, mk, g.right_size)
            } else {
                induced_sampled(&adj, idx, mk)
            }
        });
    match found {
        Some(v) => MatchingVerdict::Violation(v),
        None => MatchingVerdict::Ok { exhaustive },
    }
}

fn disjointness_violation(g: &RtGraph) -> Option<MatchingViolation> {
    let mut first: Option<MatchingViolation> = None;
    let mut keep = |v: MatchingViolation| {
        if first.is_none_or(|f| v.matching < f.matching) {
            first = Some(v);
        }
    };
    for (idx, mk) in g.matchings.iter().enumerate() {
        let mut lefts: Vec<usize> = mk.iter().map(|e| e.0).collect();
        let mut rights: Vec<usize> = mk.iter().map(|e| e.1).collect();
        lefts.sort_unstable();
        rights.sort_unstable();
        let repeated = lefts.windows(2).any(|w| w[0] == w[1]) || rights.windows(2).any(|w| w[0] == w[1]);
        if repeated {
            let e = *mk
                .iter()
                .find(|e| mk.iter().filter(|f| f.0 == e.0 || f.1 == e.1).count() > 1)
                .expect("repeated endpoint has an edge");
            keep(MatchingViolation {
                matching: idx + 1,
                edge: e,
                kind: ViolationKind::NotDisjoint,
            });
            break;
        }
    }
    let mut tagged: Vec<((usize, usize), usize)> = g
        .matchings
        .iter()
        .enumerate()
        .flat_map(|(idx, mk)| mk.iter().map(move |&e| (e, idx)))
        .collect();
    tagged.sort_unstable();
    for w in tagged.windows(2) {
        if w[0].0 == w[1].0 {
            keep(MatchingViolation {
                matching: w[1].1 + 1,
                edge: w[1].0,
                kind: ViolationKind::NotDisjoint,
            });
        }
    }
    first
}

fn partner_table(mk: &[(usize, usize)], left_len: usize) -> Vec<u32> {
    let mut partner = vec![0u32; left_len];
    for &(u, v) in mk {
        partner[u] = v as u32;
    }
    partner
}

fn induced_exhaustive(
    adj: &[Vec<u32>],
    idx: usize,
    mk: &[(usize, usize)],
    right_size: usize,
) -> Option<MatchingViolation> {
    let partner = partner_table(mk, adj.len());
    let mut in_right = vec![false; right_size + 1];
    for &(_, v) in mk {
        in_right[v] = true;
    }
    let mut worst: Option<(usize, usize)> = None;
    for &(u, _) in mk {
        for &v in &adj[u] {
            let v = v as usize;
            if v < in_right.len() && in_right[v] && partner[u] as usize != v {
                let e = (u, v);
                if worst.is_none_or(|w| e < w) {
                    worst = Some(e);
                }
            }
        }
    }
    worst.map(|edge| MatchingViolation {
        matching: idx + 1,
        edge,
        kind: ViolationKind::NotInduced,
    })
}

fn induced_sampled(adj: &[Vec<u32>], idx: usize, mk: &[(usize, usize)]) -> Option<MatchingViolation> {
    let mut rng = rng::stream(PROBE_SEED, idx as u64);
    let partner = partner_table(mk, adj.len());
    for _ in 0..PROBES_PER_MATCHING {
        let u = mk[rng.random_range(0..mk.len())].0;
        let v = mk[rng.random_range(0..mk.len())].1;
        if partner[u] as usize != v && adj[u].binary_search(&(v as u32)).is_ok() {
            return Some(MatchingViolation {
                matching: idx + 1,
                edge: (u, v),
                kind: ViolationKind::NotInduced,
            });
        }
    }
    None
}
