//! Union circuits over B: induced union witnesses, trimming and chargeable
//! gates.

use super::circuit::{Gate, GateId, WitnessCircuit};
use super::cost::RowClass;
use super::eval::{eval_circuit, GateValue};
use crate::bits::{BitVector, ColumnInterval};
use crate::error::{Error, Result};
use crate::hardgen::TripartiteInstance;

/// A witness together with the value of each of its gates.
#[derive(Clone, Debug)]
pub struct EvaluatedWitness {
    pub circuit: WitnessCircuit,
    pub values: Vec<GateValue>,
}

impl EvaluatedWitness {
    pub fn new(circuit: WitnessCircuit, inst: &TripartiteInstance) -> Result<Self> {
        let values = eval_circuit(&circuit, inst)?;
        Ok(Self { circuit, values })
    }

    /// Row class of a union gate, `None` for other kinds.
    pub fn class_of(&self, g: GateId) -> Option<RowClass> {
        match *self.circuit.gate(g) {
            Gate::Union { left, right } => Some(RowClass::new(
                &self.values[g.0].v,
                &self.values[left.0].v,
                &self.values[right.0].v,
            )),
            _ => None,
        }
    }

    fn union_gates_for<'a>(
        &'a self,
        gamma: &'a BitVector,
    ) -> impl Iterator<Item = (GateId, ColumnInterval)> + 'a {
        self.circuit
            .gates()
            .iter()
            .enumerate()
            .filter(move |(i, g)| g.is_union() && &self.values[*i].s == gamma)
            .map(|(i, _)| (GateId(i), self.values[i].k))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnionNode {
    Input { b: usize },
    Union { left: usize, right: usize },
}

/// A circuit of unions over singleton inputs. The last node is the output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnionCircuit {
    n_b: usize,
    nodes: Vec<UnionNode>,
    wset: Vec<BitVector>,
    /// Gate of the originating witness for each node, if extracted from one.
    source: Vec<Option<GateId>>,
}

impl UnionCircuit {
    pub fn new(n_b: usize, nodes: Vec<UnionNode>) -> Result<Self> {
        let source = vec![None; nodes.len()];
        Self::with_sources(n_b, nodes, source)
    }

    fn with_sources(n_b: usize, nodes: Vec<UnionNode>, source: Vec<Option<GateId>>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("union circuit has no nodes".into()));
        }
        let mut wset: Vec<BitVector> = Vec::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            let s = match *node {
                UnionNode::Input { b } if b < n_b => BitVector::from_indices(n_b, [b]),
                UnionNode::Input { b } => {
                    return Err(Error::InvalidParameter(format!("input {b} outside B")))
                }
                UnionNode::Union { left, right } if left < i && right < i => wset[left].or(&wset[right]),
                UnionNode::Union { .. } => {
                    return Err(Error::InvalidParameter(format!(
                        "node {i} reads a node that does not precede it"
                    )))
                }
            };
            wset.push(s);
        }
        Ok(Self {
            n_b,
            nodes,
            wset,
            source,
        })
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn nodes(&self) -> &[UnionNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn output(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn wset(&self, node: usize) -> &BitVector {
        &self.wset[node]
    }

    pub fn source(&self, node: usize) -> Option<GateId> {
        self.source[node]
    }

    pub fn union_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| matches!(self.nodes[i], UnionNode::Union { .. }))
    }
}

/// The union circuit below the first union gate (by id) that outputs
/// `(Γ_B(a), k, ·)`. Non-union gates feeding it become input nodes.
pub fn induced_union_witness(
    w: &EvaluatedWitness,
    inst: &TripartiteInstance,
    a: usize,
    k: ColumnInterval,
) -> Result<UnionCircuit> {
    let gamma = inst.neighbors(a);
    let root = w
        .union_gates_for(gamma)
        .find(|&(_, kk)| kk == k)
        .map(|(g, _)| g)
        .ok_or_else(|| Error::NotFound(format!("union gate for row {} on {k}", a + 1)))?;

    let mut seen = vec![false; root.0 + 1];
    let mut stack = vec![root];
    seen[root.0] = true;
    while let Some(g) = stack.pop() {
        if let Gate::Union { left, right } = *w.circuit.gate(g) {
            for c in [left, right] {
                if !seen[c.0] {
                    seen[c.0] = true;
                    stack.push(c);
                }
            }
        }
    }
    let mut index = vec![usize::MAX; root.0 + 1];
    let mut nodes = Vec::new();
    let mut source = Vec::new();
    for id in (0..=root.0).filter(|&i| seen[i]) {
        let node = match *w.circuit.gate(GateId(id)) {
            Gate::Union { left, right } => UnionNode::Union {
                left: index[left.0],
                right: index[right.0],
            },
            _ => {
                let s = &w.values[id].s;
                if s.count_ones() != 1 {
                    return Err(Error::InvalidParameter(format!(
                        "gate {id} feeds a union with a non-singleton set"
                    )));
                }
                UnionNode::Input {
                    b: s.iter_ones().next().unwrap_or(0),
                }
            }
        };
        index[id] = nodes.len();
        nodes.push(node);
        source.push(Some(GateId(id)));
    }
    UnionCircuit::with_sources(inst.n_b(), nodes, source)
}

/// Intervals `K` on which some union gate outputs `(Γ_B(a), K, ·)`, sorted.
pub fn covering_intervals(w: &EvaluatedWitness, inst: &TripartiteInstance, a: usize) -> Vec<ColumnInterval> {
    let gamma = inst.neighbors(a);
    if gamma.count_ones() < 2 {
        return Vec::new();
    }
    let mut ks: Vec<ColumnInterval> = w.union_gates_for(gamma).map(|(_, k)| k).collect();
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// A pairwise disjoint subfamily of sorted intervals, chosen greedily from
/// the left.
pub fn disjoint_subfamily(sorted: &[ColumnInterval]) -> Vec<ColumnInterval> {
    let mut out: Vec<ColumnInterval> = Vec::new();
    for &k in sorted {
        if out.last().is_none_or(|last| last.hi() < k.lo()) {
            out.push(k);
        }
    }
    out
}

/// Per node, the part of its set kept by the trimming, plus what each union
/// node passes to its left and right child. With shared nodes a child's
/// trimmed set can exceed what one particular parent passes to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrimAnnotation {
    pub wtrim: Vec<BitVector>,
    pub to_left: Vec<BitVector>,
    pub to_right: Vec<BitVector>,
}

/// Each `b` of the output set is kept only along the path that always steps
/// to the left child when that child's set contains `b`.
pub fn trim_circuit(u: &UnionCircuit) -> TrimAnnotation {
    let zeros = vec![BitVector::zeros(u.n_b); u.len()];
    let mut t = TrimAnnotation {
        wtrim: zeros.clone(),
        to_left: zeros.clone(),
        to_right: zeros,
    };
    for b in u.wset(u.output()).iter_ones() {
        let mut cur = u.output();
        loop {
            t.wtrim[cur].set(b, true);
            match u.nodes[cur] {
                UnionNode::Input { .. } => break,
                UnionNode::Union { left, right } => {
                    if u.wset[left].get(b) {
                        t.to_left[cur].set(b, true);
                        cur = left;
                    } else {
                        t.to_right[cur].set(b, true);
                        cur = right;
                    }
                }
            }
        }
    }
    t
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChargeableSet {
    /// Chargeable node indices, ascending.
    pub gates: Vec<usize>,
    /// For every node, the chargeable nodes whose trimmed set (within β′)
    /// lies inside its own.
    pub descendants: Vec<usize>,
    /// `|wtrim ∩ β′|` per node.
    pub weight: Vec<usize>,
}

impl ChargeableSet {
    /// Nodes whose descendant count exceeds `weight + 1 - threshold`.
    pub fn bound_violations(&self, threshold: usize) -> Vec<usize> {
        (0..self.descendants.len())
            .filter(|&g| self.descendants[g] > 0 && self.descendants[g] + threshold > self.weight[g] + 1)
            .collect()
    }
}

/// Union nodes holding at least `threshold` elements of `beta_prime` after
/// trimming, with both children passing up a strictly smaller part of them.
pub fn chargeable_gates(
    u: &UnionCircuit,
    trim: &TrimAnnotation,
    beta_prime: &BitVector,
    threshold: usize,
) -> ChargeableSet {
    let restricted: Vec<BitVector> = trim.wtrim.iter().map(|s| s.and(beta_prime)).collect();
    let weight: Vec<usize> = restricted.iter().map(BitVector::count_ones).collect();
    let gates: Vec<usize> = u
        .union_nodes()
        .filter(|&g| {
            let own = &restricted[g];
            weight[g] >= threshold
                && &trim.to_left[g].and(beta_prime) != own
                && &trim.to_right[g].and(beta_prime) != own
        })
        .collect();
    let descendants = restricted
        .iter()
        .map(|own| gates.iter().filter(|&&c| restricted[c].is_subset(own)).count())
        .collect();
    ChargeableSet {
        gates,
        descendants,
        weight,
    }
}
