//! Row classes and the deduplicated cost of a witness.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::Serialize;

use super::circuit::{Gate, GateKind, WitnessCircuit};
use super::eval::eval_circuit;
use crate::bits::{BitVector, RowRef};
use crate::error::Result;
use crate::hardgen::TripartiteInstance;

/// Strings up to this length are tracked in a dense bitmap.
const DENSE_MAX_LEN: usize = 8;

/// The set `{v, v_L, v_R}` of a union gate, duplicates collapsed, members in
/// ascending order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowClass {
    members: Vec<BitVector>,
}

impl RowClass {
    pub fn new(out: &BitVector, left: &BitVector, right: &BitVector) -> Self {
        let mut members = vec![out.clone(), left.clone(), right.clone()];
        members.sort();
        members.dedup();
        Self { members }
    }

    pub fn members(&self) -> &[BitVector] {
        &self.members
    }

    pub fn cost(&self) -> usize {
        self.members.iter().map(BitVector::count_ones).min().unwrap_or(0)
    }
}

/// Distinct row classes seen so far and the sum of their costs.
///
/// Keys are exact. Short strings index a bitmap by their sorted member
/// values; longer ones key a hash map by `[len, count, words...]`.
#[derive(Clone, Debug, Default)]
pub struct ClassLedger {
    dense: Vec<Vec<u64>>,
    sparse: FxHashMap<Box<[u64]>, u32>,
    count: usize,
    cost_sum: u64,
}

fn dense_index(len: usize, d: [u64; 3]) -> usize {
    (d[0] | d[1] << len | d[2] << (2 * len)) as usize
}

fn dense_cost(len: usize, idx: usize) -> u64 {
    let mask = (1u64 << len) - 1;
    let idx = idx as u64;
    (0..3)
        .map(|i| (idx >> (i * len) & mask).count_ones() as u64)
        .min()
        .unwrap_or(0)
}

impl ClassLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn cost_sum(&self) -> u64 {
        self.cost_sum
    }

    /// Records the class of a union; returns true if it was new.
    /// All three rows must have the same length.
    pub fn insert(&mut self, out: RowRef<'_>, left: RowRef<'_>, right: RowRef<'_>) -> bool {
        let len = out.len();
        debug_assert!(left.len() == len && right.len() == len);
        if len == 0 {
            return false;
        }
        if len <= DENSE_MAX_LEN {
            let mut d = [out.words()[0], left.words()[0], right.words()[0]];
            d.sort_unstable();
            // distinct members, padded by repeating the largest
            let mut u = [d[0]; 3];
            let mut n = 1;
            for &x in &d[1..] {
                if x != u[n - 1] {
                    u[n] = x;
                    n += 1;
                }
            }
            for i in n..3 {
                u[i] = u[n - 1];
            }
            let idx = dense_index(len, u);
            let map = self.dense_map(len);
            let (w, bit) = (idx / 64, 1u64 << (idx % 64));
            if map[w] & bit != 0 {
                return false;
            }
            map[w] |= bit;
            self.count += 1;
            self.cost_sum += dense_cost(len, idx);
            return true;
        }
        let mut rows = [out, left, right];
        rows.sort_unstable_by(|a, b| a.words().cmp(b.words()));
        let mut key: Vec<u64> = Vec::with_capacity(2 + 3 * out.words().len());
        key.push(len as u64);
        key.push(0);
        let mut distinct = 0u64;
        let mut cost = u32::MAX;
        for (i, r) in rows.iter().enumerate() {
            if i > 0 && rows[i - 1].words() == r.words() {
                continue;
            }
            distinct += 1;
            key.extend_from_slice(r.words());
            cost = cost.min(r.count_ones() as u32);
        }
        key[1] = distinct;
        if self.sparse.contains_key(key.as_slice()) {
            return false;
        }
        self.sparse.insert(key.into_boxed_slice(), cost);
        self.count += 1;
        self.cost_sum += cost as u64;
        true
    }

    fn dense_map(&mut self, len: usize) -> &mut Vec<u64> {
        if self.dense.len() <= len {
            self.dense.resize(len + 1, Vec::new());
        }
        let map = &mut self.dense[len];
        if map.is_empty() {
            let bits = 1usize << (3 * len);
            map.resize(bits.div_ceil(64), 0);
        }
        map
    }

    /// Set union with `other`.
    pub fn merge(&mut self, other: ClassLedger) {
        for (len, theirs) in other.dense.into_iter().enumerate() {
            if theirs.is_empty() {
                continue;
            }
            let ours = self.dense_map(len);
            let mut added = 0usize;
            let mut cost = 0u64;
            for (w, (&t, o)) in theirs.iter().zip(ours.iter_mut()).enumerate() {
                let mut fresh = t & !*o;
                *o |= t;
                while fresh != 0 {
                    let bit = fresh.trailing_zeros() as usize;
                    fresh &= fresh - 1;
                    added += 1;
                    cost += dense_cost(len, w * 64 + bit);
                }
            }
            self.count += added;
            self.cost_sum += cost;
        }
        for (key, cost) in other.sparse {
            if let std::collections::hash_map::Entry::Vacant(e) = self.sparse.entry(key) {
                e.insert(cost);
                self.count += 1;
                self.cost_sum += cost as u64;
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub gate_count: u64,
    pub input_count: u64,
    pub partition_count: u64,
    pub union_count: u64,
    pub concat_count: u64,
    pub distinct_class_count: u64,
    pub class_cost_sum: u64,
    pub total: u64,
    /// Algorithm-specific figures (group size, width, memo hits, ...).
    pub meta: BTreeMap<String, u64>,
}

impl CostReport {
    pub fn from_counts(counts: [u64; 4], ledger: &ClassLedger) -> Self {
        let gate_count = counts.iter().sum();
        Self {
            gate_count,
            input_count: counts[0],
            partition_count: counts[1],
            union_count: counts[2],
            concat_count: counts[3],
            distinct_class_count: ledger.len() as u64,
            class_cost_sum: ledger.cost_sum(),
            total: gate_count + ledger.cost_sum(),
            meta: BTreeMap::new(),
        }
    }
}

pub(crate) fn kind_slot(kind: GateKind) -> usize {
    match kind {
        GateKind::Input => 0,
        GateKind::Partition => 1,
        GateKind::Union => 2,
        GateKind::Concat => 3,
    }
}

/// Gates plus the cost of every distinct union class.
pub fn cost_report(w: &WitnessCircuit, inst: &TripartiteInstance) -> Result<CostReport> {
    let values = eval_circuit(w, inst)?;
    let mut counts = [0u64; 4];
    let mut ledger = ClassLedger::new();
    for (i, g) in w.gates().iter().enumerate() {
        counts[kind_slot(g.kind())] += 1;
        if let Gate::Union { left, right } = *g {
            ledger.insert(
                values[i].v.as_row(),
                values[left.0].v.as_row(),
                values[right.0].v.as_row(),
            );
        }
    }
    Ok(CostReport::from_counts(counts, &ledger))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BooleanMatrix;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn instance(rows: &[&str]) -> TripartiteInstance {
        let q = BooleanMatrix::parse_rows(rows).unwrap();
        let p = BooleanMatrix::zeros(1, q.n_rows());
        TripartiteInstance::from_matrices(p, q).unwrap()
    }

    #[test]
    fn single_union_costs_min_popcount() {
        let inst = instance(&["110", "001"]);
        let mut w = WitnessCircuit::new(1);
        let a = w.push(Gate::Input { b: 0 });
        let b = w.push(Gate::Input { b: 1 });
        w.push(Gate::Union { left: a, right: b });
        let r = cost_report(&w, &inst).unwrap();
        assert_eq!((r.gate_count, r.class_cost_sum, r.total), (3, 1, 4));
    }

    #[test]
    fn repeated_class_is_charged_once() {
        let inst = instance(&["110", "001"]);
        let mut w = WitnessCircuit::new(1);
        let a = w.push(Gate::Input { b: 0 });
        let b = w.push(Gate::Input { b: 1 });
        w.push(Gate::Union { left: a, right: b });
        w.push(Gate::Union { left: b, right: a });
        w.push(Gate::Union { left: a, right: b });
        let r = cost_report(&w, &inst).unwrap();
        assert_eq!(r.gate_count, 5);
        assert_eq!(r.distinct_class_count, 1);
        assert_eq!(r.total, 6);
    }

    #[test]
    fn no_unions_costs_gate_count() {
        let inst = instance(&["110", "001"]);
        let mut w = WitnessCircuit::new(1);
        w.push(Gate::Input { b: 0 });
        w.push(Gate::Input { b: 1 });
        assert_eq!(cost_report(&w, &inst).unwrap().total, 2);
    }

    #[test]
    fn absorbing_union_has_two_members() {
        let c = RowClass::new(&bv("110"), &bv("110"), &bv("100"));
        assert_eq!(c.members().len(), 2);
        assert_eq!(c.cost(), 1);
    }

    /// Reference ledger: a set of explicit classes.
    fn reference(triples: &[(BitVector, BitVector, BitVector)]) -> (usize, u64) {
        let set: BTreeSet<RowClass> = triples.iter().map(|(o, l, r)| RowClass::new(o, l, r)).collect();
        (set.len(), set.iter().map(|c| c.cost() as u64).sum())
    }

    fn arb_triple(len: usize) -> impl Strategy<Value = (BitVector, BitVector, BitVector)> {
        let one = move || proptest::collection::vec(any::<bool>(), len).prop_map(BitVector::from_bools);
        (one(), one(), one())
    }

    fn arb_batch() -> impl Strategy<Value = Vec<(BitVector, BitVector, BitVector)>> {
        prop_oneof![1usize..=8, 60usize..=70, 1usize..=3]
            .prop_flat_map(|len| proptest::collection::vec(arb_triple(len), 0..40))
    }

    proptest! {
        #[test]
        fn ledger_matches_reference(batch in arb_batch()) {
            let mut ledger = ClassLedger::new();
            for (o, l, r) in &batch {
                ledger.insert(o.as_row(), l.as_row(), r.as_row());
            }
            let (n, cost) = reference(&batch);
            prop_assert_eq!(ledger.len(), n);
            prop_assert_eq!(ledger.cost_sum(), cost);
        }

        #[test]
        fn merge_is_set_union(batch in arb_batch(), split in 0usize..40) {
            let split = split.min(batch.len());
            let (x, y) = batch.split_at(split);
            let mut left = ClassLedger::new();
            let mut right = ClassLedger::new();
            for (o, l, r) in x { left.insert(o.as_row(), l.as_row(), r.as_row()); }
            for (o, l, r) in y { right.insert(o.as_row(), l.as_row(), r.as_row()); }
            left.merge(right);
            let (n, cost) = reference(&batch);
            prop_assert_eq!(left.len(), n);
            prop_assert_eq!(left.cost_sum(), cost);
        }

        #[test]
        fn member_order_does_not_matter(t in arb_triple(5)) {
            let mut ledger = ClassLedger::new();
            prop_assert!(ledger.insert(t.0.as_row(), t.1.as_row(), t.2.as_row()));
            prop_assert!(!ledger.insert(t.2.as_row(), t.0.as_row(), t.1.as_row()));
            prop_assert!(!ledger.insert(t.1.as_row(), t.2.as_row(), t.0.as_row()));
        }
    }

    #[test]
    fn unions_over_different_intervals_share_a_class() {
        // same pattern "10" from columns [1..2] and [3..4]
        let inst = instance(&["1010", "0000"]);
        let k1 = crate::bits::ColumnInterval::new(1, 2).unwrap();
        let k2 = crate::bits::ColumnInterval::new(3, 4).unwrap();
        let mut w = WitnessCircuit::new(1);
        let a = w.push(Gate::Input { b: 0 });
        let b = w.push(Gate::Input { b: 1 });
        let pa1 = w.push(Gate::Partition { src: a, k: k1 });
        let pb1 = w.push(Gate::Partition { src: b, k: k1 });
        let pa2 = w.push(Gate::Partition { src: a, k: k2 });
        let pb2 = w.push(Gate::Partition { src: b, k: k2 });
        w.push(Gate::Union { left: pa1, right: pb1 });
        w.push(Gate::Union { left: pa2, right: pb2 });
        let r = cost_report(&w, &inst).unwrap();
        assert_eq!(r.distinct_class_count, 1);
        assert_eq!(r.class_cost_sum, 0);
        assert_eq!(r.total, 8);
    }
}
