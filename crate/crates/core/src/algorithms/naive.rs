use rustc_hash::FxHashMap;

use crate::bits::{words_for, RowRef};
use crate::hardgen::TripartiteInstance;
use crate::witness::{CircuitBuilder, GateId, UnionValues, WitnessCircuit, WitnessSink};

/// One input gate per row of Q.
pub(crate) fn emit_inputs<S: WitnessSink>(inst: &TripartiteInstance, sink: &mut S) -> Vec<GateId> {
    (0..inst.n_b()).map(|b| sink.input(b)).collect()
}

/// Rows of degree 1 are witnessed by their input gate.
pub(crate) fn output_singletons<S: WitnessSink>(inst: &TripartiteInstance, inputs: &[GateId], sink: &mut S) {
    for a in 0..inst.n_a() {
        let gamma = inst.neighbors(a);
        if gamma.count_ones() == 1 {
            let b = gamma.iter_ones().next().unwrap_or(0);
            sink.output(a, inputs[b], inst.q().row(b).as_row());
        }
    }
}

/// Exact-value cache for `acc | next`; keys are the two operands' words.
#[derive(Default)]
struct UnionMemo {
    table: FxHashMap<Box<[u64]>, Box<[u64]>>,
    hits: u64,
}

impl UnionMemo {
    fn or_into(&mut self, acc: &[u64], next: &[u64], out: &mut [u64]) {
        let mut key = Vec::with_capacity(acc.len() + next.len());
        key.extend_from_slice(acc);
        key.extend_from_slice(next);
        if let Some(v) = self.table.get(key.as_slice()) {
            self.hits += 1;
            out.copy_from_slice(v);
            return;
        }
        for ((o, x), y) in out.iter_mut().zip(acc).zip(next) {
            *o = x | y;
        }
        self.table.insert(key.into_boxed_slice(), out.to_vec().into_boxed_slice());
    }
}

/// Inputs, then for every row of degree at least 2 a left-to-right chain of
/// unions over its neighbours. With `memo`, values already computed for the
/// same operand pair are reused. Returns the number of reuses.
pub(crate) fn emit_chains<S: WitnessSink>(inst: &TripartiteInstance, sink: &mut S, memo: bool) -> u64 {
    let inputs = emit_inputs(inst, sink);
    let n_c = inst.n_c();
    let wpv = words_for(n_c);
    let mut cache = memo.then(UnionMemo::default);
    let mut acc = vec![0u64; wpv];
    let mut next = vec![0u64; wpv];
    for a in 0..inst.n_a() {
        let gamma = inst.neighbors(a);
        if gamma.count_ones() < 2 {
            continue;
        }
        let mut members = gamma.iter_ones();
        let first = members.next().unwrap_or(0);
        acc.copy_from_slice(inst.q().row(first).words());
        let mut acc_id = inputs[first];
        for b in members {
            let qb = inst.q().row(b).words();
            match cache.as_mut() {
                Some(c) => c.or_into(&acc, qb, &mut next),
                None => {
                    for ((o, x), y) in next.iter_mut().zip(&acc).zip(qb) {
                        *o = x | y;
                    }
                }
            }
            acc_id = sink.union(
                acc_id,
                inputs[b],
                UnionValues {
                    left: RowRef::new(n_c, &acc),
                    right: RowRef::new(n_c, qb),
                    out: RowRef::new(n_c, &next),
                },
            );
            std::mem::swap(&mut acc, &mut next);
        }
        sink.output(a, acc_id, RowRef::new(n_c, &acc));
    }
    output_singletons(inst, &inputs, sink);
    cache.map_or(0, |c| c.hits)
}

/// Left-to-right union chains over full rows.
pub fn naive_witness(inst: &TripartiteInstance) -> WitnessCircuit {
    let mut b = CircuitBuilder::new(inst.n_a());
    emit_chains(inst, &mut b, false);
    b.finish()
}

/// The naive chains with an exact memo over operand pairs. The circuit is
/// the same gate for gate; the memo only changes how values are obtained.
/// Returns the circuit and the number of memo hits.
pub fn memoized_union_witness(inst: &TripartiteInstance) -> (WitnessCircuit, u64) {
    let mut b = CircuitBuilder::new(inst.n_a());
    let hits = emit_chains(inst, &mut b, true);
    (b.finish(), hits)
}
