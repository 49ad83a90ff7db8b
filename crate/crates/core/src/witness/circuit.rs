use std::fmt;

use crate::bits::ColumnInterval;
use crate::error::{Error, Result};

/// Position of a gate in its circuit's topological order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct GateId(pub usize);

impl GateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    /// Row `b` of Q over all of C (`b` is 0-based).
    Input { b: usize },
    Partition { src: GateId, k: ColumnInterval },
    Union { left: GateId, right: GateId },
    Concat { left: GateId, right: GateId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Input,
    Partition,
    Union,
    Concat,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Input => "input",
            Self::Partition => "partition",
            Self::Union => "union",
            Self::Concat => "concat",
        }
    }
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Self::Input { .. } => GateKind::Input,
            Self::Partition { .. } => GateKind::Partition,
            Self::Union { .. } => GateKind::Union,
            Self::Concat { .. } => GateKind::Concat,
        }
    }

    pub fn children(&self) -> impl Iterator<Item = GateId> {
        let (a, b) = match *self {
            Self::Input { .. } => (None, None),
            Self::Partition { src, .. } => (Some(src), None),
            Self::Union { left, right } | Self::Concat { left, right } => (Some(left), Some(right)),
        };
        a.into_iter().chain(b)
    }

    pub fn is_union(&self) -> bool {
        matches!(self, Self::Union { .. })
    }
}

/// An edge `from -> to` that breaks the partition, union, concat order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderViolation {
    pub from: GateId,
    pub to: GateId,
}

/// Gates in topological order plus one designated output per row of A
/// (`None` for rows that need no output).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WitnessCircuit {
    gates: Vec<Gate>,
    outputs: Vec<Option<GateId>>,
}

impl WitnessCircuit {
    pub fn new(n_a: usize) -> Self {
        Self {
            gates: Vec::new(),
            outputs: vec![None; n_a],
        }
    }

    /// Checks that every child precedes its parent and outputs are in range.
    pub fn from_parts(gates: Vec<Gate>, outputs: Vec<Option<GateId>>) -> Result<Self> {
        for (i, g) in gates.iter().enumerate() {
            if let Some(c) = g.children().find(|c| c.0 >= i) {
                return Err(Error::Parse(format!(
                    "gate {i} has child {} that does not precede it",
                    c.0
                )));
            }
        }
        if let Some(o) = outputs.iter().flatten().find(|o| o.0 >= gates.len()) {
            return Err(Error::Parse(format!("output gate {} does not exist", o.0)));
        }
        Ok(Self { gates, outputs })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id.0]
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn outputs(&self) -> &[Option<GateId>] {
        &self.outputs
    }

    pub fn set_output(&mut self, a: usize, g: GateId) {
        self.outputs[a] = Some(g);
    }

    /// Appends a gate; children must already exist.
    pub fn push(&mut self, gate: Gate) -> GateId {
        debug_assert!(gate.children().all(|c| c.0 < self.gates.len()));
        self.gates.push(gate);
        GateId(self.gates.len() - 1)
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }

    /// First edge (by parent id) that sends a union result into a partition,
    /// or a concat result into a partition or union.
    pub fn order_violation(&self) -> Option<OrderViolation> {
        self.gates.iter().enumerate().find_map(|(i, g)| {
            let bad = |child: GateId| {
                let ck = self.gates[child.0].kind();
                match g.kind() {
                    GateKind::Partition => matches!(ck, GateKind::Union | GateKind::Concat),
                    GateKind::Union => ck == GateKind::Concat,
                    _ => false,
                }
            };
            g.children().find(|&c| bad(c)).map(|c| OrderViolation {
                from: c,
                to: GateId(i),
            })
        })
    }

    pub fn is_structured(&self) -> bool {
        self.order_violation().is_none()
    }

    /// Drops gate `id`, renumbering later gates. Fails if another gate
    /// reads it; an output pointing at it becomes `None`.
    pub fn remove_gate(&self, id: GateId) -> Result<Self> {
        if id.0 >= self.gates.len() {
            return Err(Error::NotFound(format!("gate {}", id.0)));
        }
        if self.gates.iter().any(|g| g.children().any(|c| c == id)) {
            return Err(Error::InvalidParameter(format!("gate {} has readers", id.0)));
        }
        let shift = |c: GateId| if c.0 > id.0 { GateId(c.0 - 1) } else { c };
        let gates = self
            .gates
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != id.0)
            .map(|(_, g)| match *g {
                Gate::Input { b } => Gate::Input { b },
                Gate::Partition { src, k } => Gate::Partition { src: shift(src), k },
                Gate::Union { left, right } => Gate::Union {
                    left: shift(left),
                    right: shift(right),
                },
                Gate::Concat { left, right } => Gate::Concat {
                    left: shift(left),
                    right: shift(right),
                },
            })
            .collect();
        let outputs = self
            .outputs
            .iter()
            .map(|o| o.filter(|&g| g != id).map(shift))
            .collect();
        Ok(Self { gates, outputs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_violations_are_found() {
        let k = ColumnInterval::new(1, 2).unwrap();
        let mut w = WitnessCircuit::new(1);
        let a = w.push(Gate::Input { b: 0 });
        let b = w.push(Gate::Input { b: 1 });
        let u = w.push(Gate::Union { left: a, right: b });
        assert!(w.is_structured());
        let p = w.push(Gate::Partition { src: u, k });
        assert_eq!(w.order_violation(), Some(OrderViolation { from: u, to: p }));

        let mut w = WitnessCircuit::new(1);
        let a = w.push(Gate::Input { b: 0 });
        let c = w.push(Gate::Concat { left: a, right: a });
        w.push(Gate::Union { left: c, right: a });
        assert!(!w.is_structured());
    }

    #[test]
    fn from_parts_rejects_forward_edges() {
        let gates = vec![Gate::Union {
            left: GateId(0),
            right: GateId(0),
        }];
        assert!(WitnessCircuit::from_parts(gates, vec![]).is_err());
        let ok = vec![Gate::Input { b: 0 }];
        assert!(WitnessCircuit::from_parts(ok.clone(), vec![Some(GateId(1))]).is_err());
        assert!(WitnessCircuit::from_parts(ok, vec![Some(GateId(0)), None]).is_ok());
    }

    #[test]
    fn remove_gate_renumbers() {
        let mut w = WitnessCircuit::new(2);
        let a = w.push(Gate::Input { b: 0 });
        let b = w.push(Gate::Input { b: 1 });
        let u = w.push(Gate::Union { left: a, right: b });
        w.set_output(0, a);
        w.set_output(1, u);
        assert!(w.remove_gate(a).is_err());
        let x = w.remove_gate(GateId(1)).is_err();
        assert!(x);
        let r = w.remove_gate(u).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.outputs(), &[Some(a), None]);
    }
}
