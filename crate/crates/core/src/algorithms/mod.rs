//! Combinatorial BMM algorithms that emit witness circuits.

mod grouped;
mod naive;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use grouped::{block_union_witness, four_russians_witness, gray_code, gray_subsets, FourRussiansParams, MAX_GROUP};
pub use naive::{memoized_union_witness, naive_witness};

use crate::bits::bmm_rows;
use crate::error::{Error, Result};
use crate::hardgen::TripartiteInstance;
use crate::witness::{CircuitBuilder, CostMeter, CostReport, WitnessCircuit, WitnessSink};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Naive,
    Memo,
    #[serde(rename = "fourrussians")]
    FourRussians,
    Block,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Self::Naive, Self::Memo, Self::FourRussians, Self::Block];

    pub fn name(self) -> &'static str {
        match self {
            Self::Naive => "naive",
            Self::Memo => "memo",
            Self::FourRussians => "fourrussians",
            Self::Block => "block",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown algorithm {s:?} (expected naive|memo|fourrussians|block)"
                ))
            })
    }
}

/// An algorithm with optional overrides of its group size and width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgorithmChoice {
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<usize>,
}

impl AlgorithmChoice {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            t: None,
            w: None,
        }
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_w(mut self, w: usize) -> Self {
        self.w = Some(w);
        self
    }

    /// Four Russians parameters for `inst`, defaults filled in.
    pub fn four_russians_params(&self, inst: &TripartiteInstance) -> FourRussiansParams {
        let d = FourRussiansParams::defaults(inst);
        FourRussiansParams {
            t: self.t.unwrap_or(d.t),
            w: self.w.unwrap_or(d.w),
        }
    }

    /// Block group size for `inst`: `⌊log₂ n_A⌋` unless overridden, capped by
    /// `n_B`.
    pub fn block_t(&self, inst: &TripartiteInstance) -> usize {
        self.t.unwrap_or_else(|| {
            let log = (usize::BITS - 1 - inst.n_a().max(1).leading_zeros()) as usize;
            log.clamp(1, inst.n_b().clamp(1, MAX_GROUP))
        })
    }
}

/// Emits the chosen algorithm's witness into `sink`; returns its metadata.
pub fn emit<S: WitnessSink>(
    choice: &AlgorithmChoice,
    inst: &TripartiteInstance,
    sink: &mut S,
) -> Result<Vec<(&'static str, u64)>> {
    Ok(match choice.algorithm {
        Algorithm::Naive => {
            naive::emit_chains(inst, sink, false);
            Vec::new()
        }
        Algorithm::Memo => vec![("memo_hits", naive::emit_chains(inst, sink, true))],
        Algorithm::FourRussians => {
            let p = choice.four_russians_params(inst);
            grouped::emit_four_russians(inst, p, sink)?;
            vec![("t", p.t as u64), ("w", p.w as u64)]
        }
        Algorithm::Block => {
            let t = choice.block_t(inst);
            grouped::emit_block(inst, t, sink)?;
            vec![("t", t as u64)]
        }
    })
}

/// The materialized witness of the chosen algorithm.
pub fn build(choice: &AlgorithmChoice, inst: &TripartiteInstance) -> Result<WitnessCircuit> {
    let mut b = CircuitBuilder::new(inst.n_a());
    emit(choice, inst, &mut b)?;
    Ok(b.finish())
}

/// Cost of a streamed witness and the rows whose outputs disagreed with, or
/// were missing from, the product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeteredRun {
    pub report: CostReport,
    pub mismatched_rows: Vec<usize>,
    pub outputs: u64,
}

impl MeteredRun {
    pub fn outputs_ok(&self) -> bool {
        self.mismatched_rows.is_empty()
    }
}

/// Streams the chosen algorithm's witness through a cost meter.
pub fn meter(choice: &AlgorithmChoice, inst: &TripartiteInstance) -> Result<MeteredRun> {
    let product = bmm_rows(inst.p(), inst.q())?;
    let mut m = CostMeter::new(&product);
    let meta = emit(choice, inst, &mut m)?;
    let mut report = m.report();
    report.meta = meta.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let mut mismatched_rows = m.mismatched_rows().to_vec();
    mismatched_rows.extend(m.unanswered_rows());
    mismatched_rows.sort_unstable();
    mismatched_rows.dedup();
    Ok(MeteredRun {
        report,
        mismatched_rows,
        outputs: m.outputs_seen(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardgen::random_instance;
    use crate::witness::cost_report;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("quantum".parse::<Algorithm>().is_err());
    }

    #[test]
    fn meter_agrees_with_materialized_cost() {
        let inst = random_instance(24, 20, 30, 0.4, 0.5, 17).unwrap();
        for a in Algorithm::ALL {
            for choice in [AlgorithmChoice::new(a), AlgorithmChoice::new(a).with_t(3).with_w(4)] {
                let w = build(&choice, &inst).unwrap();
                let mut full = cost_report(&w, &inst).unwrap();
                let run = meter(&choice, &inst).unwrap();
                assert!(run.outputs_ok(), "{a}");
                full.meta = run.report.meta.clone();
                assert_eq!(full, run.report, "{a}");
            }
        }
    }

    #[test]
    fn meter_is_thread_count_independent() {
        let inst = random_instance(64, 64, 64, 0.5, 0.5, 2).unwrap();
        let choice = AlgorithmChoice::new(Algorithm::FourRussians);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| meter(&choice, &inst).unwrap());
        let b = four.install(|| meter(&choice, &inst).unwrap());
        assert_eq!(a, b);
    }
}
