use std::fmt;

use serde::Serialize;

use super::circuit::{Gate, GateId, WitnessCircuit};
use crate::bits::{restrict, BitVector, ColumnInterval};
use crate::error::{Error, Result};
use crate::hardgen::TripartiteInstance;

/// The triple `(S, K, v)` carried by a gate: a set over B, an interval of C,
/// and `v` of length `|K|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GateValue {
    pub s: BitVector,
    pub k: ColumnInterval,
    pub v: BitVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedReason {
    /// Partition target is not inside the source interval.
    PartitionNotSubset,
    /// Union operands over different intervals.
    UnionIntervalMismatch,
    /// Left concat operand starts after the right one.
    ConcatOrder,
    /// Gap between the operands' intervals.
    ConcatGap,
    /// Concat operands over different sets.
    ConcatSetMismatch,
    /// Left concat operand ends after the right one.
    ConcatOverhang,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UndefinedGate {
    pub gate: GateId,
    pub reason: UndefinedReason,
}

impl fmt::Display for UndefinedGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gate {} is undefined ({:?})", self.gate.0, self.reason)
    }
}

fn undefined(gate: usize, reason: UndefinedReason) -> Error {
    Error::Undefined(UndefinedGate {
        gate: GateId(gate),
        reason,
    })
}

/// The value of every gate, or the first undefined gate.
pub fn eval_circuit(w: &WitnessCircuit, inst: &TripartiteInstance) -> Result<Vec<GateValue>> {
    let n_b = inst.n_b();
    let full = ColumnInterval::full(inst.n_c());
    let mut values: Vec<GateValue> = Vec::with_capacity(w.len());
    for (i, gate) in w.gates().iter().enumerate() {
        let value = match *gate {
            Gate::Input { b } => {
                if b >= n_b {
                    return Err(Error::DimensionMismatch(format!(
                        "input gate {i} reads row {} of a {n_b}-row Q",
                        b + 1
                    )));
                }
                GateValue {
                    s: BitVector::from_indices(n_b, [b]),
                    k: full,
                    v: inst.q().row(b).clone(),
                }
            }
            Gate::Partition { src, k } => {
                let x = &values[src.0];
                if !k.is_subset_of(&x.k) {
                    return Err(undefined(i, UndefinedReason::PartitionNotSubset));
                }
                GateValue {
                    s: x.s.clone(),
                    k,
                    v: x.v.slice(k.lo() - x.k.lo(), k.len()),
                }
            }
            Gate::Union { left, right } => {
                let (l, r) = (&values[left.0], &values[right.0]);
                if l.k != r.k {
                    return Err(undefined(i, UndefinedReason::UnionIntervalMismatch));
                }
                GateValue {
                    s: l.s.or(&r.s),
                    k: l.k,
                    v: l.v.or(&r.v),
                }
            }
            Gate::Concat { left, right } => {
                let (l, r) = (&values[left.0], &values[right.0]);
                let reason = if l.k.lo() > r.k.lo() {
                    Some(UndefinedReason::ConcatOrder)
                } else if l.k.hi() + 1 < r.k.lo() {
                    Some(UndefinedReason::ConcatGap)
                } else if l.s != r.s {
                    Some(UndefinedReason::ConcatSetMismatch)
                } else if l.k.hi() > r.k.hi() {
                    Some(UndefinedReason::ConcatOverhang)
                } else {
                    None
                };
                if let Some(reason) = reason {
                    return Err(undefined(i, reason));
                }
                let extra = r.k.hi() - l.k.hi();
                let tail = r.v.slice(r.v.len() - extra, extra);
                GateValue {
                    s: l.s.clone(),
                    k: ColumnInterval::new(l.k.lo(), r.k.hi())?,
                    v: l.v.concat(&tail),
                }
            }
        };
        values.push(value);
    }
    Ok(values)
}

/// `wrow(Q_S)|_K` computed directly from the instance.
pub fn expected_value(inst: &TripartiteInstance, s: &BitVector, k: ColumnInterval) -> Result<BitVector> {
    restrict(&inst.q().or_rows(s), k)
}
