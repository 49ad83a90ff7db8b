//! Emitters that precompute every subset union inside groups of B.

use rayon::prelude::*;
use serde::Serialize;

use super::naive::{emit_inputs, output_singletons};
use crate::bits::{extract_bits, words_for, BitVector, ColumnInterval, RowRef};
use crate::error::{Error, Result};
use crate::hardgen::TripartiteInstance;
use crate::witness::{CircuitBuilder, GateId, UnionValues, WitnessCircuit, WitnessSink};

/// Largest group size; a group's table has `2^t` entries per interval.
pub const MAX_GROUP: usize = 24;

/// The `i`-th word of the reflected binary Gray code.
pub fn gray_code(i: usize) -> usize {
    i ^ (i >> 1)
}

/// All nonempty subsets of a `t`-element group in Gray-code order.
pub fn gray_subsets(t: usize) -> impl Iterator<Item = usize> {
    (1..1usize << t).map(gray_code)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FourRussiansParams {
    /// Group size over B.
    pub t: usize,
    /// Interval width over C.
    pub w: usize,
}

fn floor_log2(x: usize) -> usize {
    (usize::BITS - 1 - x.max(1).leading_zeros()) as usize
}

impl FourRussiansParams {
    /// `t = ⌊log₂ n_B⌋`, `w = ⌊log₂ n_C / 3⌋`, both at least 1.
    pub fn defaults(inst: &TripartiteInstance) -> Self {
        Self {
            t: floor_log2(inst.n_b()).clamp(1, MAX_GROUP),
            w: (floor_log2(inst.n_c()) / 3).max(1),
        }
    }

    pub fn validate(&self, inst: &TripartiteInstance) -> Result<()> {
        check_group(self.t, inst)?;
        if self.w == 0 || self.w > inst.n_c().max(1) {
            return Err(Error::InvalidParameter(format!(
                "width w = {} must lie in [1..{}]",
                self.w,
                inst.n_c()
            )));
        }
        Ok(())
    }
}

fn check_group(t: usize, inst: &TripartiteInstance) -> Result<()> {
    if t == 0 || t > inst.n_b().max(1) || t > MAX_GROUP {
        return Err(Error::InvalidParameter(format!(
            "group size t = {t} must lie in [1..{}]",
            inst.n_b().clamp(1, MAX_GROUP)
        )));
    }
    Ok(())
}

/// Per-b gate ids and values over one interval.
struct Pieces {
    ids: Vec<GateId>,
    values: Vec<u64>,
    wpv: usize,
    len: usize,
}

/// The witnessed row segments of one interval, in `rows` order.
struct RowSegments {
    ids: Vec<GateId>,
    values: Vec<u64>,
}

struct GroupTable {
    ids: Vec<GateId>,
    values: Vec<u64>,
}

/// Subset tables for every group, then one union chain per row across the
/// row's nonempty group pieces.
fn emit_interval<S: WitnessSink>(
    inst: &TripartiteInstance,
    rows: &[usize],
    t: usize,
    pieces: &Pieces,
    sink: &mut S,
) -> RowSegments {
    let (wpv, len) = (pieces.wpv, pieces.len);
    let n_b = inst.n_b();
    let mut tables = Vec::with_capacity(n_b.div_ceil(t));
    for start in (0..n_b).step_by(t) {
        let size = t.min(n_b - start);
        let mut ids = vec![GateId::default(); 1 << size];
        let mut values = vec![0u64; (1 << size) * wpv];
        for j in 0..size {
            ids[1 << j] = pieces.ids[start + j];
            values[(1 << j) * wpv..((1 << j) + 1) * wpv]
                .copy_from_slice(&pieces.values[(start + j) * wpv..(start + j + 1) * wpv]);
        }
        for c in gray_subsets(size) {
            if c.count_ones() < 2 {
                continue;
            }
            let top = 1usize << floor_log2(c);
            let prev = c ^ top;
            let (done, rest) = values.split_at_mut(c * wpv);
            let out = &mut rest[..wpv];
            let left = &done[prev * wpv..(prev + 1) * wpv];
            let right = &done[top * wpv..(top + 1) * wpv];
            for ((o, x), y) in out.iter_mut().zip(left).zip(right) {
                *o = x | y;
            }
            ids[c] = sink.union(
                ids[prev],
                ids[top],
                UnionValues {
                    left: RowRef::new(len, left),
                    right: RowRef::new(len, right),
                    out: RowRef::new(len, out),
                },
            );
        }
        tables.push(GroupTable { ids, values });
    }

    let mut seg = RowSegments {
        ids: Vec::with_capacity(rows.len()),
        values: Vec::with_capacity(rows.len() * wpv),
    };
    let mut acc = vec![0u64; wpv];
    let mut next = vec![0u64; wpv];
    let mut mask = [0u64];
    for &a in rows {
        let gamma = inst.neighbors(a).words();
        let mut acc_id: Option<GateId> = None;
        for (g, table) in tables.iter().enumerate() {
            let start = g * t;
            extract_bits(gamma, start, t.min(n_b - start), &mut mask);
            let c = mask[0] as usize;
            if c == 0 {
                continue;
            }
            let piece = &table.values[c * wpv..(c + 1) * wpv];
            acc_id = Some(match acc_id {
                None => {
                    acc.copy_from_slice(piece);
                    table.ids[c]
                }
                Some(id) => {
                    for ((o, x), y) in next.iter_mut().zip(&acc).zip(piece) {
                        *o = x | y;
                    }
                    let u = sink.union(
                        id,
                        table.ids[c],
                        UnionValues {
                            left: RowRef::new(len, &acc),
                            right: RowRef::new(len, piece),
                            out: RowRef::new(len, &next),
                        },
                    );
                    std::mem::swap(&mut acc, &mut next);
                    u
                }
            });
        }
        seg.ids.push(acc_id.expect("rows passed here have neighbours"));
        seg.values.extend_from_slice(&acc);
    }
    seg
}

/// Runs `f` once per interval. Sinks that can fork run the intervals in
/// parallel and are joined back in interval order.
fn per_interval<S, R, F>(sink: &mut S, count: usize, f: F) -> Vec<R>
where
    S: WitnessSink,
    R: Send,
    F: Fn(&mut S, usize) -> R + Sync,
{
    if sink.fork().is_none() {
        return (0..count).map(|i| f(sink, i)).collect();
    }
    let shared: &S = sink;
    let done: Vec<(S, R)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut part = shared.fork().expect("sink forked before");
            let r = f(&mut part, i);
            (part, r)
        })
        .collect();
    done.into_iter()
        .map(|(part, r)| {
            sink.join(part);
            r
        })
        .collect()
}

fn rows_needing_unions(inst: &TripartiteInstance) -> Vec<usize> {
    (0..inst.n_a())
        .filter(|&a| inst.neighbors(a).count_ones() >= 2)
        .collect()
}

/// Partition every row of Q into width-`w` intervals, precompute subset
/// unions per group and interval, union each row's group pieces, then
/// concatenate its interval segments from left to right.
pub(crate) fn emit_four_russians<S: WitnessSink>(
    inst: &TripartiteInstance,
    params: FourRussiansParams,
    sink: &mut S,
) -> Result<()> {
    params.validate(inst)?;
    let n_c = inst.n_c();
    let inputs = emit_inputs(inst, sink);
    let intervals = ColumnInterval::chunks(n_c, params.w);
    let part_ids: Vec<Vec<GateId>> = intervals
        .iter()
        .map(|&k| inputs.iter().map(|&g| sink.partition(g, k)).collect())
        .collect();
    let rows = rows_needing_unions(inst);

    let segments = per_interval(sink, intervals.len(), |s, i| {
        let k = intervals[i];
        let wpv = words_for(k.len());
        let mut values = vec![0u64; inst.n_b() * wpv];
        for (b, slot) in values.chunks_mut(wpv).enumerate() {
            extract_bits(inst.q().row(b).words(), k.start(), k.len(), slot);
        }
        let pieces = Pieces {
            ids: part_ids[i].clone(),
            values,
            wpv,
            len: k.len(),
        };
        emit_interval(inst, &rows, params.t, &pieces, s)
    });

    for (r, &a) in rows.iter().enumerate() {
        let mut full = BitVector::zeros(n_c);
        let mut acc: Option<GateId> = None;
        for (i, k) in intervals.iter().enumerate() {
            let wpv = words_for(k.len());
            let seg = &segments[i];
            full.or_shifted(k.start(), RowRef::new(k.len(), &seg.values[r * wpv..(r + 1) * wpv]));
            acc = Some(match acc {
                None => seg.ids[r],
                Some(prev) => sink.concat(prev, seg.ids[r]),
            });
        }
        if let Some(g) = acc {
            sink.output(a, g, full.as_row());
        }
    }
    output_singletons(inst, &inputs, sink);
    Ok(())
}

/// Subset precomputation over full rows, without partitions.
pub(crate) fn emit_block<S: WitnessSink>(inst: &TripartiteInstance, t: usize, sink: &mut S) -> Result<()> {
    check_group(t, inst)?;
    let n_c = inst.n_c();
    let wpv = words_for(n_c);
    let inputs = emit_inputs(inst, sink);
    let mut values = Vec::with_capacity(inst.n_b() * wpv);
    for b in 0..inst.n_b() {
        values.extend_from_slice(inst.q().row(b).words());
    }
    let pieces = Pieces {
        ids: inputs.clone(),
        values,
        wpv,
        len: n_c,
    };
    let rows = rows_needing_unions(inst);
    let seg = emit_interval(inst, &rows, t, &pieces, sink);
    for (r, &a) in rows.iter().enumerate() {
        sink.output(a, seg.ids[r], RowRef::new(n_c, &seg.values[r * wpv..(r + 1) * wpv]));
    }
    output_singletons(inst, &inputs, sink);
    Ok(())
}

pub fn four_russians_witness(inst: &TripartiteInstance, params: FourRussiansParams) -> Result<WitnessCircuit> {
    let mut b = CircuitBuilder::new(inst.n_a());
    emit_four_russians(inst, params, &mut b)?;
    Ok(b.finish())
}

pub fn block_union_witness(inst: &TripartiteInstance, t: usize) -> Result<WitnessCircuit> {
    let mut b = CircuitBuilder::new(inst.n_a());
    emit_block(inst, t, &mut b)?;
    Ok(b.finish())
}
