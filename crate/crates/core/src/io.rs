//! File formats: instance and witness JSON, cost CSV rows, atomic writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::{BitVector, BooleanMatrix, ColumnInterval};
use crate::error::{Error, Result};
use crate::hardgen::{InstanceSource, Origin, TripartiteInstance};
use crate::witness::{Gate, GateId, GateKind, WitnessCircuit};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub n_a: usize,
    pub n_b: usize,
    pub n_c: usize,
    pub p_rows: Vec<String>,
    pub q_rows: Vec<String>,
    /// `[i, j, k]` triples, 1-based.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<[usize; 3]>>,
    pub sparsify_prob: f64,
    pub seed: u64,
    pub source: InstanceSource,
}

impl From<&TripartiteInstance> for InstanceFile {
    fn from(inst: &TripartiteInstance) -> Self {
        let hex = |m: &BooleanMatrix| m.rows().iter().map(BitVector::to_hex).collect();
        Self {
            schema_version: SCHEMA_VERSION,
            n_a: inst.n_a(),
            n_b: inst.n_b(),
            n_c: inst.n_c(),
            p_rows: hex(inst.p()),
            q_rows: hex(inst.q()),
            origin: inst
                .origin()
                .map(|o| o.iter().map(|t| [t.i + 1, t.j + 1, t.k + 1]).collect()),
            sparsify_prob: inst.sparsify_prob(),
            seed: inst.seed(),
            source: inst.source().clone(),
        }
    }
}

fn parse_matrix(rows: &[String], n_rows: usize, n_cols: usize, name: &str) -> Result<BooleanMatrix> {
    if rows.len() != n_rows {
        return Err(Error::Parse(format!("{name} has {} rows, expected {n_rows}", rows.len())));
    }
    let rows = rows
        .iter()
        .map(|h| BitVector::from_hex(h, n_cols))
        .collect::<Result<Vec<_>>>()?;
    BooleanMatrix::from_rows(n_cols, rows)
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<TripartiteInstance> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let p = parse_matrix(&self.p_rows, self.n_a, self.n_b, "p_rows")?;
        let q = parse_matrix(&self.q_rows, self.n_b, self.n_c, "q_rows")?;
        let origin = self
            .origin
            .map(|triples| {
                triples
                    .into_iter()
                    .map(|[i, j, k]| {
                        if i == 0 || j == 0 || k == 0 {
                            return Err(Error::Parse("origin triples are 1-based".into()));
                        }
                        Ok(Origin {
                            i: i - 1,
                            j: j - 1,
                            k: k - 1,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        TripartiteInstance::from_parts(p, q, origin, self.sparsify_prob, self.seed, self.source)
    }
}

pub fn instance_to_json(inst: &TripartiteInstance) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from(inst))?;
    s.push('\n');
    Ok(s)
}

pub fn instance_from_json(text: &str) -> Result<TripartiteInstance> {
    serde_json::from_str::<InstanceFile>(text)?.into_instance()
}

pub fn read_instance(path: &Path) -> Result<TripartiteInstance> {
    instance_from_json(&fs::read_to_string(path)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateRecord {
    pub id: usize,
    pub kind: String,
    pub children: Vec<usize>,
    /// Row of Q read by an input gate, 1-based.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_lo: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_hi: Option<usize>,
}

/// Gate ids are 0-based positions; `outputs[a]` names the gate answering
/// row `a + 1`, or is null for rows without neighbours.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub gates: Vec<GateRecord>,
    pub outputs: Vec<Option<usize>>,
}

impl From<&WitnessCircuit> for WitnessFile {
    fn from(w: &WitnessCircuit) -> Self {
        let gates = w
            .gates()
            .iter()
            .enumerate()
            .map(|(id, g)| {
                let mut rec = GateRecord {
                    id,
                    kind: g.kind().name().to_string(),
                    children: g.children().map(GateId::index).collect(),
                    b: None,
                    k_lo: None,
                    k_hi: None,
                };
                match *g {
                    Gate::Input { b } => rec.b = Some(b + 1),
                    Gate::Partition { k, .. } => {
                        rec.k_lo = Some(k.lo());
                        rec.k_hi = Some(k.hi());
                    }
                    _ => {}
                }
                rec
            })
            .collect();
        Self {
            gates,
            outputs: w.outputs().iter().map(|o| o.map(GateId::index)).collect(),
        }
    }
}

impl WitnessFile {
    pub fn into_circuit(self) -> Result<WitnessCircuit> {
        let gates = self
            .gates
            .iter()
            .enumerate()
            .map(|(pos, rec)| {
                if rec.id != pos {
                    return Err(Error::Parse(format!("gate at position {pos} has id {}", rec.id)));
                }
                let child = |i: usize| {
                    rec.children.get(i).copied().map(GateId).ok_or_else(|| {
                        Error::Parse(format!("gate {pos} ({}) is missing child {}", rec.kind, i + 1))
                    })
                };
                let arity = |n: usize| {
                    if rec.children.len() != n {
                        return Err(Error::Parse(format!(
                            "gate {pos} ({}) has {} children, expected {n}",
                            rec.kind,
                            rec.children.len()
                        )));
                    }
                    Ok(())
                };
                let kind = kind_from_name(&rec.kind)
                    .ok_or_else(|| Error::Parse(format!("gate {pos} has unknown kind {:?}", rec.kind)))?;
                let gate = match kind {
                    GateKind::Input => {
                        arity(0)?;
                        let b = rec
                            .b
                            .filter(|&b| b >= 1)
                            .ok_or_else(|| Error::Parse(format!("input gate {pos} needs a 1-based b")))?;
                        Gate::Input { b: b - 1 }
                    }
                    GateKind::Partition => {
                        arity(1)?;
                        let (lo, hi) = rec
                            .k_lo
                            .zip(rec.k_hi)
                            .ok_or_else(|| Error::Parse(format!("partition gate {pos} needs k_lo and k_hi")))?;
                        Gate::Partition {
                            src: child(0)?,
                            k: ColumnInterval::new(lo, hi)?,
                        }
                    }
                    GateKind::Union => {
                        arity(2)?;
                        Gate::Union {
                            left: child(0)?,
                            right: child(1)?,
                        }
                    }
                    GateKind::Concat => {
                        arity(2)?;
                        Gate::Concat {
                            left: child(0)?,
                            right: child(1)?,
                        }
                    }
                };
                Ok(gate)
            })
            .collect::<Result<Vec<_>>>()?;
        WitnessCircuit::from_parts(gates, self.outputs.into_iter().map(|o| o.map(GateId)).collect())
    }
}

pub fn witness_to_json(w: &WitnessCircuit) -> Result<String> {
    let mut s = serde_json::to_string(&WitnessFile::from(w))?;
    s.push('\n');
    Ok(s)
}

pub fn witness_from_json(text: &str) -> Result<WitnessCircuit> {
    serde_json::from_str::<WitnessFile>(text)?.into_circuit()
}

pub fn read_witness(path: &Path) -> Result<WitnessCircuit> {
    witness_from_json(&fs::read_to_string(path)?)
}

pub fn kind_from_name(name: &str) -> Option<GateKind> {
    [GateKind::Input, GateKind::Partition, GateKind::Union, GateKind::Concat]
        .into_iter()
        .find(|k| k.name() == name)
}

/// Writes `bytes` to a temporary sibling of `path`, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Serializes rows as CSV with a header.
pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Appends rows to a CSV file, writing the header only when the file is new
/// or empty. The file is rewritten atomically.
pub fn append_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let existing = match fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(e.into()),
    };
    let fresh = csv_string(rows)?;
    let out = if existing.trim().is_empty() {
        fresh
    } else {
        let body = fresh.split_once('\n').map_or("", |(_, rest)| rest);
        let mut s = existing;
        if !s.ends_with('\n') {
            s.push('\n');
        }
        s.push_str(body);
        s
    };
    write_atomic(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{four_russians_witness, FourRussiansParams};
    use crate::hardgen::{build_instance, build_rt_graph, random_instance, ApFreeSet};

    #[test]
    fn instance_round_trips_with_origin() {
        let g = build_rt_graph(3, ApFreeSet::from_elements(3, vec![1, 2]).unwrap()).unwrap();
        let inst = build_instance(&g, 0.5, 4).unwrap();
        let text = instance_to_json(&inst).unwrap();
        assert_eq!(instance_from_json(&text).unwrap(), inst);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["q_rows"][0], "14");
        assert_eq!(v["source"]["kind"], "rs");
        assert_eq!(v["origin"].as_array().unwrap().len(), 6);
    }

    #[test]
    fn random_instance_has_no_origin_field() {
        let inst = random_instance(5, 6, 7, 0.5, 0.5, 1).unwrap();
        let text = instance_to_json(&inst).unwrap();
        assert!(!text.contains("origin"));
        assert_eq!(instance_from_json(&text).unwrap(), inst);
    }

    #[test]
    fn malformed_instances_are_rejected() {
        let inst = random_instance(2, 2, 2, 0.5, 0.5, 1).unwrap();
        let mut f = InstanceFile::from(&inst);
        f.p_rows.pop();
        assert!(f.into_instance().is_err());
        let mut f = InstanceFile::from(&inst);
        f.schema_version = 9;
        assert!(f.into_instance().is_err());
        let mut f = InstanceFile::from(&inst);
        f.q_rows[0] = "zz".into();
        assert!(f.into_instance().is_err());
        assert!(instance_from_json("{").is_err());
    }

    #[test]
    fn witness_round_trips() {
        let inst = random_instance(8, 8, 8, 0.5, 0.5, 3).unwrap();
        let w = four_russians_witness(&inst, FourRussiansParams { t: 2, w: 3 }).unwrap();
        let text = witness_to_json(&w).unwrap();
        assert_eq!(witness_from_json(&text).unwrap(), w);
        let f: WitnessFile = serde_json::from_str(&text).unwrap();
        assert!(f.gates.iter().all(|g| kind_from_name(&g.kind).is_some()));
        let p = f.gates.iter().find(|g| g.kind == "partition").unwrap();
        assert_eq!((p.k_lo, p.k_hi), (Some(1), Some(3)));
    }

    #[test]
    fn malformed_witnesses_are_rejected() {
        let bad = r#"{"gates":[{"id":0,"kind":"input","children":[],"b":0}],"outputs":[0]}"#;
        assert!(witness_from_json(bad).is_err());
        let bad = r#"{"gates":[{"id":0,"kind":"union","children":[0]}],"outputs":[]}"#;
        assert!(witness_from_json(bad).is_err());
        let bad = r#"{"gates":[{"id":0,"kind":"input","children":[],"b":1},{"id":1,"kind":"union","children":[0,2]}],"outputs":[]}"#;
        assert!(witness_from_json(bad).is_err());
    }

    #[test]
    fn csv_appends_without_repeating_header() {
        #[derive(Serialize)]
        struct Row {
            a: u32,
            b: &'static str,
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        append_csv(&path, &[Row { a: 1, b: "x" }]).unwrap();
        append_csv(&path, &[Row { a: 2, b: "y" }]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a,b\n1,x\n2,y\n");
    }
}
