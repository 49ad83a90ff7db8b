//! Sets of integers without three-term arithmetic progressions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApMethod {
    Greedy,
    Behrend,
    /// Caller-supplied elements (for instance files and tests).
    Explicit,
}

impl std::str::FromStr for ApMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Self::Greedy),
            "behrend" => Ok(Self::Behrend),
            other => Err(Error::InvalidParameter(format!(
                "unknown progression-free method {other:?} (expected greedy|behrend)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApFreeSet {
    limit: usize,
    elements: Vec<usize>,
    method: ApMethod,
}

impl ApFreeSet {
    /// Validates an explicit set: distinct, inside `[1..limit]`, AP-free.
    pub fn from_elements(limit: usize, mut elements: Vec<usize>) -> Result<Self> {
        elements.sort_unstable();
        if elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("repeated element".into()));
        }
        if elements.first().is_some_and(|&x| x == 0) || elements.last().is_some_and(|&x| x > limit) {
            return Err(Error::InvalidParameter(format!(
                "elements must lie in [1..{limit}]"
            )));
        }
        if !is_ap_free(&elements) {
            return Err(Error::InvalidParameter(
                "set contains a three-term arithmetic progression".into(),
            ));
        }
        Ok(Self {
            limit,
            elements,
            method: ApMethod::Explicit,
        })
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn method(&self) -> ApMethod {
        self.method
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max(&self) -> usize {
        self.elements.last().copied().unwrap_or(0)
    }
}

/// True iff no `x < y < z` in the set satisfy `x + z = 2y`.
///
/// Brute force over pairs of equal parity, looking up the midpoint.
pub fn is_ap_free(elements: &[usize]) -> bool {
    let mut s = elements.to_vec();
    s.sort_unstable();
    s.dedup();
    for (i, &x) in s.iter().enumerate() {
        for &z in &s[i + 1..] {
            if (x + z) % 2 == 0 && s.binary_search(&((x + z) / 2)).is_ok() {
                return false;
            }
        }
    }
    true
}

pub fn ap_free_set(limit: usize, method: ApMethod) -> Result<ApFreeSet> {
    if limit == 0 {
        return Err(Error::InvalidParameter("limit must be at least 1".into()));
    }
    let elements = match method {
        ApMethod::Greedy => greedy(limit),
        ApMethod::Behrend => behrend(limit),
        ApMethod::Explicit => {
            return Err(Error::InvalidParameter(
                "explicit sets are built with ApFreeSet::from_elements".into(),
            ))
        }
    };
    if !is_ap_free(&elements) {
        return Err(Error::Construction(format!(
            "{method:?} construction produced a progression for limit {limit}"
        )));
    }
    Ok(ApFreeSet {
        limit,
        elements,
        method,
    })
}

fn greedy(limit: usize) -> Vec<usize> {
    let mut member = vec![false; limit + 1];
    let mut out: Vec<usize> = Vec::new();
    for x in 1..=limit {
        // x would be the largest term: need y in set with 2y - x in set.
        let closes = out
            .iter()
            .any(|&y| 2 * y > x && member[2 * y - x] && 2 * y - x < y);
        if !closes {
            member[x] = true;
            out.push(x);
        }
    }
    out
}

/// Digit vectors in base `base` with digits at most `(base - 1) / 2` lying on
/// one sphere `sum x_i^2 = R`; adding two of them never carries, so a
/// progression would have to be one in digit space, which a sphere rules out.
fn behrend(limit: usize) -> Vec<usize> {
    let log = (limit as f64).log2();
    let dims = (log.sqrt().ceil() as u32).max(1);
    let mut base = (limit as f64).powf(1.0 / dims as f64).floor() as usize;
    while base > 1 && base.checked_pow(dims).is_none_or(|p| p > limit) {
        base -= 1;
    }
    while (base + 1).checked_pow(dims).is_some_and(|p| p <= limit) {
        base += 1;
    }
    let base = base.max(1);
    let digit_max = (base - 1) / 2;

    let mut layers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut digits = vec![0usize; dims as usize];
    loop {
        let radius: usize = digits.iter().map(|d| d * d).sum();
        let value = digits.iter().rev().fold(0usize, |acc, &d| acc * base + d);
        layers.entry(radius).or_default().push(value + 1);

        let mut i = 0;
        loop {
            if i == digits.len() {
                let best = layers
                    .into_values()
                    .max_by(|a, b| a.len().cmp(&b.len()).then(b.cmp(a)))
                    .unwrap_or_default();
                let mut best = best;
                best.sort_unstable();
                return best;
            }
            if digits[i] < digit_max {
                digits[i] += 1;
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}
