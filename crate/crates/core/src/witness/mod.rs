//! Witness circuits: gates carrying `(S, K, v)` triples, their evaluation,
//! validation and cost.

pub mod circuit;
pub mod cost;
pub mod eval;
pub mod sink;
pub mod union;
pub mod validate;

pub use circuit::{Gate, GateId, GateKind, OrderViolation, WitnessCircuit};
pub use cost::{cost_report, ClassLedger, CostReport, RowClass};
pub use eval::{eval_circuit, expected_value, GateValue, UndefinedGate, UndefinedReason};
pub use sink::{CircuitBuilder, CostMeter, UnionValues, WitnessSink};
pub use union::{
    chargeable_gates, covering_intervals, disjoint_subfamily, induced_union_witness, trim_circuit,
    ChargeableSet, EvaluatedWitness, TrimAnnotation, UnionCircuit, UnionNode,
};
pub use validate::{gates_with, validate_witness, ValidationReport};
