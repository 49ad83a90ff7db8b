//! Hard instances: progression-free sets, graphs made of induced matchings,
//! and the tripartite instances built from them.

pub mod apfree;
pub mod instance;
pub mod rtgraph;

pub use apfree::{ap_free_set, is_ap_free, ApFreeSet, ApMethod};
pub use instance::{
    build_instance, density_matched_random, random_instance, unique_structure, unique_structures,
    InstanceKind, InstanceSource, Origin, TripartiteInstance, UniqueStructure,
};
pub use rtgraph::{
    build_rt_graph, verify_induced_matchings, MatchingVerdict, MatchingViolation, RtGraph,
    ViolationKind,
};

use crate::error::Result;

/// The hard instance used at scale `n`: `n / 3` matchings over a greedy
/// progression-free subset of `[1..n/3]`, so every part has at most `n`
/// vertices.
pub fn rs_family(n: usize, sparsify_prob: f64, seed: u64) -> Result<TripartiteInstance> {
    let m = (n / 3).max(1);
    let s = ap_free_set(m, ApMethod::Greedy)?;
    build_instance(&build_rt_graph(m, s)?, sparsify_prob, seed)
}
