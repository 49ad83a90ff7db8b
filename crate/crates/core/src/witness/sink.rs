//! Destinations for emitted gates: a materialized circuit, or a streaming
//! meter that only counts gates and classes.

use super::circuit::{Gate, GateId, GateKind, WitnessCircuit};
use super::cost::{kind_slot, ClassLedger, CostReport};
use crate::bits::{BitVector, BooleanMatrix, ColumnInterval, RowRef};

/// Values on the three wires of a union gate.
#[derive(Clone, Copy, Debug)]
pub struct UnionValues<'a> {
    pub left: RowRef<'a>,
    pub right: RowRef<'a>,
    pub out: RowRef<'a>,
}

pub trait WitnessSink: Sized + Send + Sync {
    fn input(&mut self, b: usize) -> GateId;
    fn partition(&mut self, src: GateId, k: ColumnInterval) -> GateId;
    fn union(&mut self, left: GateId, right: GateId, values: UnionValues<'_>) -> GateId;
    fn concat(&mut self, left: GateId, right: GateId) -> GateId;
    /// Designates `g`, whose value is `value` over all of C, as row `a`'s output.
    fn output(&mut self, a: usize, g: GateId, value: RowRef<'_>);

    /// An empty sink whose results can be [`join`](Self::join)ed back, if
    /// this sink supports independent emission. Sinks whose gate ids must
    /// follow emission order return `None`.
    fn fork(&self) -> Option<Self>;
    fn join(&mut self, other: Self);
}

/// Builds the circuit gate by gate.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    circuit: WitnessCircuit,
}

impl CircuitBuilder {
    pub fn new(n_a: usize) -> Self {
        Self {
            circuit: WitnessCircuit::new(n_a),
        }
    }

    pub fn finish(self) -> WitnessCircuit {
        self.circuit
    }
}

impl WitnessSink for CircuitBuilder {
    fn input(&mut self, b: usize) -> GateId {
        self.circuit.push(Gate::Input { b })
    }

    fn partition(&mut self, src: GateId, k: ColumnInterval) -> GateId {
        self.circuit.push(Gate::Partition { src, k })
    }

    fn union(&mut self, left: GateId, right: GateId, _: UnionValues<'_>) -> GateId {
        self.circuit.push(Gate::Union { left, right })
    }

    fn concat(&mut self, left: GateId, right: GateId) -> GateId {
        self.circuit.push(Gate::Concat { left, right })
    }

    fn output(&mut self, a: usize, g: GateId, _: RowRef<'_>) {
        self.circuit.set_output(a, g);
    }

    fn fork(&self) -> Option<Self> {
        None
    }

    fn join(&mut self, _: Self) {
        unreachable!("circuit builders never fork")
    }
}

/// Counts gates and distinct classes without storing the circuit, and checks
/// every designated output against a reference product.
#[derive(Debug)]
pub struct CostMeter<'a> {
    product: &'a BooleanMatrix,
    counts: [u64; 4],
    ledger: ClassLedger,
    outputs: u64,
    output_rows: BitVector,
    mismatched: Vec<usize>,
}

impl<'a> CostMeter<'a> {
    pub fn new(product: &'a BooleanMatrix) -> Self {
        Self {
            product,
            counts: [0; 4],
            ledger: ClassLedger::new(),
            outputs: 0,
            output_rows: BitVector::zeros(product.n_rows()),
            mismatched: Vec::new(),
        }
    }

    fn bump(&mut self, kind: GateKind) -> GateId {
        let slot = kind_slot(kind);
        self.counts[slot] += 1;
        GateId(self.counts.iter().sum::<u64>() as usize - 1)
    }

    pub fn report(&self) -> CostReport {
        CostReport::from_counts(self.counts, &self.ledger)
    }

    pub fn outputs_seen(&self) -> u64 {
        self.outputs
    }

    /// Rows whose designated output differed from the product, ascending.
    pub fn mismatched_rows(&self) -> &[usize] {
        &self.mismatched
    }

    /// Rows of the product that are nonzero but received no output.
    pub fn unanswered_rows(&self) -> Vec<usize> {
        (0..self.product.n_rows())
            .filter(|&a| !self.output_rows.get(a) && !self.product.row(a).is_zero())
            .collect()
    }
}

impl WitnessSink for CostMeter<'_> {
    fn input(&mut self, _: usize) -> GateId {
        self.bump(GateKind::Input)
    }

    fn partition(&mut self, _: GateId, _: ColumnInterval) -> GateId {
        self.bump(GateKind::Partition)
    }

    fn union(&mut self, _: GateId, _: GateId, v: UnionValues<'_>) -> GateId {
        self.ledger.insert(v.out, v.left, v.right);
        self.bump(GateKind::Union)
    }

    fn concat(&mut self, _: GateId, _: GateId) -> GateId {
        self.bump(GateKind::Concat)
    }

    fn output(&mut self, a: usize, _: GateId, value: RowRef<'_>) {
        self.outputs += 1;
        self.output_rows.set(a, true);
        let want = self.product.row(a);
        if want.len() != value.len() || want.words() != value.words() {
            self.mismatched.push(a);
        }
    }

    fn fork(&self) -> Option<Self> {
        Some(Self::new(self.product))
    }

    fn join(&mut self, other: Self) {
        for (c, o) in self.counts.iter_mut().zip(other.counts) {
            *c += o;
        }
        self.ledger.merge(other.ledger);
        self.outputs += other.outputs;
        self.output_rows.or_assign(&other.output_rows);
        self.mismatched.extend(other.mismatched);
        self.mismatched.sort_unstable();
    }
}
