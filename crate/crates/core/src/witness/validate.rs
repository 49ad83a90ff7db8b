use rustc_hash::FxHashMap;
use serde::Serialize;

use super::circuit::{GateId, OrderViolation, WitnessCircuit};
use super::eval::{eval_circuit, GateValue, UndefinedGate};
use crate::bits::{bmm_oracle, BitVector, ColumnInterval};
use crate::error::{Error, Result};
use crate::hardgen::TripartiteInstance;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub structured: bool,
    #[serde(skip)]
    pub order_violation: Option<OrderViolation>,
    pub all_defined: bool,
    #[serde(skip)]
    pub undefined: Option<UndefinedGate>,
    pub correct: bool,
    /// Rows (0-based) with neighbours but no gate producing their product row.
    pub missing_rows: Vec<usize>,
    /// Rows with no neighbour in B; they cannot be witnessed and are exempt.
    pub exempt_rows: Vec<usize>,
    /// Rows whose designated output differs from the reference product.
    pub output_mismatches: Vec<usize>,
}

pub fn validate_witness(w: &WitnessCircuit, inst: &TripartiteInstance) -> Result<ValidationReport> {
    if w.outputs().len() != inst.n_a() {
        return Err(Error::DimensionMismatch(format!(
            "witness has {} output slots for {} rows",
            w.outputs().len(),
            inst.n_a()
        )));
    }
    let order_violation = w.order_violation();
    let (values, undefined) = match eval_circuit(w, inst) {
        Ok(v) => (Some(v), None),
        Err(Error::Undefined(u)) => (None, Some(u)),
        Err(e) => return Err(e),
    };
    let exempt_rows: Vec<usize> = (0..inst.n_a())
        .filter(|&a| inst.neighbors(a).is_zero())
        .collect();
    let mut missing_rows = Vec::new();
    let mut output_mismatches = Vec::new();
    if let Some(values) = &values {
        let product = bmm_oracle(inst.p(), inst.q())?;
        let full = ColumnInterval::full(inst.n_c());
        let mut by_set: FxHashMap<&BitVector, Vec<usize>> = FxHashMap::default();
        for (i, x) in values.iter().enumerate() {
            if x.k == full {
                by_set.entry(&x.s).or_default().push(i);
            }
        }
        for a in 0..inst.n_a() {
            let gamma = inst.neighbors(a);
            let want = product.row(a);
            if !gamma.is_zero() {
                let found = by_set
                    .get(gamma)
                    .is_some_and(|ids| ids.iter().any(|&i| &values[i].v == want));
                if !found {
                    missing_rows.push(a);
                }
            }
            if let Some(g) = w.outputs()[a] {
                if !designated_ok(&values[g.0], gamma, full, want) {
                    output_mismatches.push(a);
                }
            } else if !gamma.is_zero() {
                output_mismatches.push(a);
            }
        }
    }
    let structured = order_violation.is_none();
    let all_defined = undefined.is_none();
    Ok(ValidationReport {
        structured,
        order_violation,
        all_defined,
        undefined,
        correct: structured && all_defined && missing_rows.is_empty() && output_mismatches.is_empty(),
        missing_rows,
        exempt_rows,
        output_mismatches,
    })
}

fn designated_ok(x: &GateValue, gamma: &BitVector, full: ColumnInterval, want: &BitVector) -> bool {
    x.k == full && &x.s == gamma && &x.v == want
}

/// Gate ids (ascending) whose value is exactly `(s, k, ·)`.
pub fn gates_with<'a>(
    values: &'a [GateValue],
    s: &'a BitVector,
    k: ColumnInterval,
) -> impl Iterator<Item = GateId> + 'a {
    values
        .iter()
        .enumerate()
        .filter(move |(_, x)| x.k == k && &x.s == s)
        .map(|(i, _)| GateId(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BooleanMatrix;
    use crate::witness::circuit::Gate;

    fn identity_instance(n: usize) -> TripartiteInstance {
        let q = BooleanMatrix::parse_rows(&["1010", "0110", "0001"][..n]).unwrap();
        TripartiteInstance::from_matrices(BooleanMatrix::identity(n), q).unwrap()
    }

    #[test]
    fn input_gates_witness_identity() {
        let inst = identity_instance(3);
        let mut w = WitnessCircuit::new(3);
        for b in 0..3 {
            let g = w.push(Gate::Input { b });
            w.set_output(b, g);
        }
        let r = validate_witness(&w, &inst).unwrap();
        assert!(r.correct, "{r:?}");
        assert!(r.exempt_rows.is_empty());
    }

    #[test]
    fn empty_rows_are_exempt() {
        let p = BooleanMatrix::parse_rows(&["10", "00"]).unwrap();
        let q = BooleanMatrix::parse_rows(&["11", "01"]).unwrap();
        let inst = TripartiteInstance::from_matrices(p, q).unwrap();
        let mut w = WitnessCircuit::new(2);
        let g = w.push(Gate::Input { b: 0 });
        w.set_output(0, g);
        let r = validate_witness(&w, &inst).unwrap();
        assert!(r.correct);
        assert_eq!(r.exempt_rows, vec![1]);
    }

    #[test]
    fn union_into_partition_is_unstructured() {
        let inst = identity_instance(2);
        let mut w = WitnessCircuit::new(2);
        let a = w.push(Gate::Input { b: 0 });
        let b = w.push(Gate::Input { b: 1 });
        w.set_output(0, a);
        w.set_output(1, b);
        let u = w.push(Gate::Union { left: a, right: b });
        w.push(Gate::Partition {
            src: u,
            k: ColumnInterval::new(1, 2).unwrap(),
        });
        let r = validate_witness(&w, &inst).unwrap();
        assert!(!r.structured);
        assert!(r.all_defined);
        assert!(!r.correct);
    }

    #[test]
    fn wrong_designated_output_is_reported() {
        let inst = identity_instance(2);
        let mut w = WitnessCircuit::new(2);
        let a = w.push(Gate::Input { b: 0 });
        let b = w.push(Gate::Input { b: 1 });
        w.set_output(0, b);
        w.set_output(1, a);
        let r = validate_witness(&w, &inst).unwrap();
        assert!(r.missing_rows.is_empty());
        assert_eq!(r.output_mismatches, vec![0, 1]);
        assert!(!r.correct);
    }
}
