//! Bit-packed rows and matrices.
//!
//! Bits are stored least-significant-first inside `u64` words; bit `i` of a
//! vector is bit `i % 64` of word `i / 64`. Bits past `len` in the last word
//! are always zero, so derived equality, ordering and hashing are exact
//! comparisons of the logical bit strings.
//!
//! Column intervals are 1-based and inclusive. Everything else (row and
//! vertex indices) is 0-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
pub fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

#[inline]
fn tail_mask(len: usize) -> u64 {
    match len % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Copies bits `[start, start + len)` of `src` into `out` (which must hold
/// `words_for(len)` words). Bits of `src` past its end read as zero.
pub fn extract_bits(src: &[u64], start: usize, len: usize, out: &mut [u64]) {
    let nw = words_for(len);
    let wi = start / WORD;
    let sh = start % WORD;
    for (k, slot) in out.iter_mut().enumerate().take(nw) {
        let lo = src.get(wi + k).copied().unwrap_or(0) >> sh;
        let hi = if sh == 0 {
            0
        } else {
            src.get(wi + k + 1).copied().unwrap_or(0) << (WORD - sh)
        };
        *slot = lo | hi;
    }
    if nw > 0 {
        out[nw - 1] &= tail_mask(len);
    }
}

/// Borrowed view of a bit string: a length plus its canonical words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RowRef<'a> {
    len: usize,
    words: &'a [u64],
}

impl<'a> RowRef<'a> {
    pub fn new(len: usize, words: &'a [u64]) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        debug_assert!(words.last().is_none_or(|w| w & !tail_mask(len) == 0));
        Self { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &'a [u64] {
        self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    pub fn to_bitvector(&self) -> BitVector {
        BitVector {
            len: self.len,
            words: self.words.to_vec(),
        }
    }
}

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut words = vec![u64::MAX; words_for(len)];
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { len, words }
    }

    /// Builds a vector from raw words, clearing any bits past `len`.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { len, words }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut v = Self::zeros(0);
        for b in bits {
            v.push(b);
        }
        v
    }

    /// Set of indices as a vector of length `len`.
    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, ones: I) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.set(i, true);
        }
        v
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        self.len += 1;
        if bit {
            self.set(self.len - 1, true);
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn as_row(&self) -> RowRef<'_> {
        RowRef {
            len: self.len,
            words: &self.words,
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let m = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= m;
        } else {
            self.words[i / WORD] &= !m;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn check_len(&self, other: &Self) {
        assert_eq!(self.len, other.len, "bit vector length mismatch");
    }

    pub fn or(&self, other: &Self) -> Self {
        self.check_len(other);
        Self {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn and(&self, other: &Self) -> Self {
        self.check_len(other);
        Self {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    /// `self AND NOT other`.
    pub fn and_not(&self, other: &Self) -> Self {
        self.check_len(other);
        Self {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    pub fn or_assign(&mut self, other: &Self) {
        self.check_len(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn and_assign(&mut self, other: &Self) {
        self.check_len(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.check_len(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.check_len(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    /// Bits `[start, start + len)` as a new vector (0-based start).
    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = vec![0; words_for(len)];
        extract_bits(&self.words, start, len, &mut out);
        Self { len, words: out }
    }

    /// ORs `src` into this vector starting at bit `offset`.
    pub fn or_shifted(&mut self, offset: usize, src: RowRef<'_>) {
        assert!(offset + src.len <= self.len, "write out of range");
        let wi = offset / WORD;
        let sh = offset % WORD;
        for (k, &w) in src.words.iter().enumerate() {
            self.words[wi + k] |= w << sh;
            if sh != 0 && wi + k + 1 < self.words.len() {
                self.words[wi + k + 1] |= w >> (WORD - sh);
            }
        }
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.len);
        }
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.len + other.len);
        out.or_shifted(0, self.as_row());
        out.or_shifted(self.len, other.as_row());
        out
    }

    /// Lowercase hex with column 1 as the most significant bit, left-padded
    /// with zeros to `ceil(len / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let pad = digits * 4 - self.len;
        let mut s = String::with_capacity(digits);
        for d in 0..digits {
            let mut nib = 0u32;
            for t in 0..4 {
                let pos = d * 4 + t;
                if pos >= pad && self.get(pos - pad) {
                    nib |= 1 << (3 - t);
                }
            }
            s.push(char::from_digit(nib, 16).unwrap());
        }
        s
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        let digits = len.div_ceil(4);
        if hex.len() != digits {
            return Err(Error::Parse(format!(
                "hex row has {} digits, expected {digits} for {len} columns",
                hex.len()
            )));
        }
        let pad = digits * 4 - len;
        let mut v = Self::zeros(len);
        for (d, ch) in hex.chars().enumerate() {
            let nib = ch
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit {ch:?}")))?;
            for t in 0..4 {
                if nib >> (3 - t) & 1 == 1 {
                    let pos = d * 4 + t;
                    if pos < pad {
                        return Err(Error::Parse("nonzero padding bit in hex row".into()));
                    }
                    v.set(pos - pad, true);
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    /// Parses a `0`/`1` string, first character = first bit.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_bools)
    }
}

/// A subinterval `{c_lo, ..., c_hi}` of the column set, 1-based inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColumnInterval {
    lo: usize,
    hi: usize,
}

impl ColumnInterval {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo == 0 || hi < lo {
            return Err(Error::InvalidParameter(format!(
                "[{lo}..{hi}] is not a 1-based interval"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// `new`, additionally requiring `hi <= n`.
    pub fn within(lo: usize, hi: usize, n: usize) -> Result<Self> {
        let k = Self::new(lo, hi).map_err(|_| Error::IntervalOutOfRange { lo, hi, n })?;
        if hi > n {
            return Err(Error::IntervalOutOfRange { lo, hi, n });
        }
        Ok(k)
    }

    /// `[1..n]`.
    pub fn full(n: usize) -> Self {
        assert!(n >= 1, "empty column set has no full interval");
        Self { lo: 1, hi: n }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// 0-based index of the first column.
    pub fn start(&self) -> usize {
        self.lo - 1
    }

    pub fn contains(&self, col: usize) -> bool {
        self.lo <= col && col <= self.hi
    }

    /// Does the interval contain the 0-based column index `c`?
    pub fn contains_index(&self, c: usize) -> bool {
        self.contains(c + 1)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Consecutive intervals of width `w` covering `[1..n]`; the last one
    /// takes the remainder.
    pub fn chunks(n: usize, w: usize) -> Vec<Self> {
        assert!(w >= 1);
        (0..n.div_ceil(w))
            .map(|j| Self {
                lo: j * w + 1,
                hi: ((j + 1) * w).min(n),
            })
            .collect()
    }
}

impl fmt::Display for ColumnInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]", self.lo, self.hi)
    }
}

/// `v` restricted to the columns of `k`.
pub fn restrict(v: &BitVector, k: ColumnInterval) -> Result<BitVector> {
    if k.hi() > v.len() {
        return Err(Error::IntervalOutOfRange {
            lo: k.lo(),
            hi: k.hi(),
            n: v.len(),
        });
    }
    Ok(v.slice(k.start(), k.len()))
}

/// The columns of `k` (1-based) at which the slice `v` over `k` is one.
pub fn columns_of(k: ColumnInterval, v: &BitVector) -> Result<Vec<usize>> {
    if v.len() != k.len() {
        return Err(Error::DimensionMismatch(format!(
            "slice of length {} over interval {k} of length {}",
            v.len(),
            k.len()
        )));
    }
    Ok(v.iter_ones().map(|i| k.lo() + i).collect())
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<BitVector>,
}

impl BooleanMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            rows: vec![BitVector::zeros(n_cols); n_rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(n_cols: usize, rows: Vec<BitVector>) -> Result<Self> {
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_cols) {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has length {}, expected {n_cols}",
                r.len()
            )));
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols,
            rows,
        })
    }

    /// Parses rows given as `0`/`1` strings. All rows must have equal length.
    pub fn parse_rows(rows: &[&str]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.parse::<BitVector>())
            .collect::<Result<Vec<_>>>()?;
        let n_cols = rows.first().map_or(0, BitVector::len);
        Self::from_rows(n_cols, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        self.rows[i].set(j, bit);
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn count_ones(&self) -> usize {
        self.rows.iter().map(BitVector::count_ones).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n_cols, self.n_rows);
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.iter_ones() {
                t.set(j, i, true);
            }
        }
        t
    }

    /// OR of the rows selected by `set` (a vector over this matrix's rows).
    pub fn or_rows(&self, set: &BitVector) -> BitVector {
        assert_eq!(set.len(), self.n_rows, "row selector length mismatch");
        let mut acc = BitVector::zeros(self.n_cols);
        for b in set.iter_ones() {
            acc.or_assign(&self.rows[b]);
        }
        acc
    }
}

impl fmt::Debug for BooleanMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BooleanMatrix {}x{}", self.n_rows, self.n_cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        Ok(())
    }
}

fn check_product_dims(p: &BooleanMatrix, q: &BooleanMatrix) -> Result<()> {
    if p.n_cols != q.n_rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            p.n_rows, p.n_cols, q.n_rows, q.n_cols
        )));
    }
    Ok(())
}

/// Reference Boolean product: a plain triple loop over entries.
pub fn bmm_oracle(p: &BooleanMatrix, q: &BooleanMatrix) -> Result<BooleanMatrix> {
    check_product_dims(p, q)?;
    let mut out = BooleanMatrix::zeros(p.n_rows, q.n_cols);
    for i in 0..p.n_rows {
        for j in 0..q.n_cols {
            let mut bit = false;
            for k in 0..p.n_cols {
                if p.get(i, k) && q.get(k, j) {
                    bit = true;
                    break;
                }
            }
            if bit {
                out.set(i, j, true);
            }
        }
    }
    Ok(out)
}

/// Word-parallel Boolean product (each output row is an OR of `q` rows).
/// Used where the triple loop is too slow; tested against [`bmm_oracle`].
pub fn bmm_rows(p: &BooleanMatrix, q: &BooleanMatrix) -> Result<BooleanMatrix> {
    check_product_dims(p, q)?;
    let rows = p.rows.iter().map(|r| q.or_rows(r)).collect();
    Ok(BooleanMatrix {
        n_rows: p.n_rows,
        n_cols: q.n_cols,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn oracle_identity_left_factor() {
        let p = BooleanMatrix::identity(2);
        let q = BooleanMatrix::parse_rows(&["10", "11"]).unwrap();
        assert_eq!(bmm_oracle(&p, &q).unwrap(), q);
    }

    #[test]
    fn oracle_or_of_both_rows() {
        let p = BooleanMatrix::parse_rows(&["11"]).unwrap();
        let q = BooleanMatrix::parse_rows(&["10", "01"]).unwrap();
        let r = bmm_oracle(&p, &q).unwrap();
        assert_eq!(r, BooleanMatrix::parse_rows(&["11"]).unwrap());
    }

    #[test]
    fn oracle_rejects_dimension_mismatch() {
        let p = BooleanMatrix::zeros(2, 3);
        let q = BooleanMatrix::zeros(2, 2);
        assert!(matches!(bmm_oracle(&p, &q), Err(Error::DimensionMismatch(_))));
        assert!(bmm_rows(&p, &q).is_err());
    }

    #[test]
    fn restrict_examples() {
        let v = bv("10110");
        let k = ColumnInterval::new(2, 4).unwrap();
        let s = restrict(&v, k).unwrap();
        assert_eq!(s, bv("011"));
        assert_eq!(columns_of(k, &s).unwrap(), vec![3, 4]);
        assert_eq!(restrict(&v, ColumnInterval::full(5)).unwrap(), v);
    }

    #[test]
    fn restrict_out_of_range() {
        let v = bv("101");
        let k = ColumnInterval::new(2, 4).unwrap();
        assert!(matches!(
            restrict(&v, k),
            Err(Error::IntervalOutOfRange { lo: 2, hi: 4, n: 3 })
        ));
    }

    #[test]
    fn interval_validation() {
        assert!(ColumnInterval::new(0, 3).is_err());
        assert!(ColumnInterval::new(4, 3).is_err());
        assert!(ColumnInterval::within(2, 9, 8).is_err());
        let chunks = ColumnInterval::chunks(7, 3);
        assert_eq!(
            chunks,
            vec![
                ColumnInterval::new(1, 3).unwrap(),
                ColumnInterval::new(4, 6).unwrap(),
                ColumnInterval::new(7, 7).unwrap()
            ]
        );
    }

    #[test]
    fn hex_layout() {
        // 0010100 -> value 0b0010100 = 0x14
        assert_eq!(bv("0010100").to_hex(), "14");
        assert_eq!(bv("1").to_hex(), "1");
        assert_eq!(bv("10000").to_hex(), "10");
        assert_eq!(BitVector::zeros(0).to_hex(), "");
        assert_eq!(BitVector::from_hex("14", 7).unwrap(), bv("0010100"));
        assert!(BitVector::from_hex("f4", 7).is_err());
        assert!(BitVector::from_hex("014", 7).is_err());
        assert!(BitVector::from_hex("1g", 7).is_err());
    }

    #[test]
    fn canonical_padding_after_ops() {
        let v = BitVector::from_words(3, vec![u64::MAX]);
        assert_eq!(v.count_ones(), 3);
        assert_eq!(v, BitVector::ones(3));
        assert_eq!(BitVector::ones(70).count_ones(), 70);
    }

    #[test]
    fn concat_and_shifted_writes() {
        let a = bv("101");
        let b = bv("0011");
        assert_eq!(a.concat(&b), bv("1010011"));
        let long = BitVector::from_indices(130, [0, 63, 64, 129]);
        let s = long.slice(60, 70);
        assert_eq!(s.iter_ones().collect::<Vec<_>>(), vec![3, 4, 69]);
        let mut dst = BitVector::zeros(200);
        dst.or_shifted(61, long.as_row());
        assert_eq!(dst.iter_ones().collect::<Vec<_>>(), vec![61, 124, 125, 190]);
    }

    fn random_matrix(rng: &mut impl rand::Rng, r: usize, c: usize) -> BooleanMatrix {
        let rows = (0..r)
            .map(|_| BitVector::from_bools((0..c).map(|_| rng.random_bool(0.4))))
            .collect();
        BooleanMatrix::from_rows(c, rows).unwrap()
    }

    #[test]
    fn oracle_matches_dot_product_definition() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.random_range(1..=32);
            let k = rng.random_range(1..=32);
            let m = rng.random_range(1..=32);
            let p = random_matrix(&mut rng, n, k);
            let q = random_matrix(&mut rng, k, m);
            let out = bmm_oracle(&p, &q).unwrap();
            // per-entry boolean dot product over explicit bool vectors
            let pb: Vec<Vec<bool>> = (0..n).map(|i| (0..k).map(|t| p.get(i, t)).collect()).collect();
            let qb: Vec<Vec<bool>> = (0..k).map(|t| (0..m).map(|j| q.get(t, j)).collect()).collect();
            for (i, prow) in pb.iter().enumerate() {
                for j in 0..m {
                    let dot = prow.iter().zip(qb.iter().map(|row| row[j])).any(|(&x, y)| x && y);
                    assert_eq!(out.get(i, j), dot);
                }
            }
            assert_eq!(bmm_rows(&p, &q).unwrap(), out);
        }
    }

    fn arb_bits(max: usize) -> impl Strategy<Value = BitVector> {
        prop::collection::vec(any::<bool>(), 1..max).prop_map(BitVector::from_bools)
    }

    proptest! {
        #[test]
        fn restrict_full_is_identity(v in arb_bits(200)) {
            let k = ColumnInterval::full(v.len());
            prop_assert_eq!(restrict(&v, k).unwrap(), v);
        }

        #[test]
        fn popcount_matches_bits(v in arb_bits(300)) {
            let by_bit = (0..v.len()).filter(|&i| v.get(i)).count();
            prop_assert_eq!(v.count_ones(), by_bit);
            prop_assert_eq!(v.iter_ones().count(), by_bit);
        }

        #[test]
        fn union_popcount_subadditive(bits in prop::collection::vec((any::<bool>(), any::<bool>()), 1..300)) {
            let u = BitVector::from_bools(bits.iter().map(|b| b.0));
            let v = BitVector::from_bools(bits.iter().map(|b| b.1));
            let or = u.or(&v).count_ones();
            prop_assert!(or <= u.count_ones() + v.count_ones());
            prop_assert_eq!(or == u.count_ones() + v.count_ones(), u.and(&v).is_zero());
        }

        #[test]
        fn hex_round_trip(v in arb_bits(150)) {
            prop_assert_eq!(BitVector::from_hex(&v.to_hex(), v.len()).unwrap(), v);
        }

        #[test]
        fn slice_matches_bitwise(v in arb_bits(200), a in 0usize..200, b in 0usize..200) {
            let (lo, hi) = (a.min(b) % v.len(), a.max(b) % v.len());
            let (lo, hi) = (lo.min(hi), lo.max(hi));
            let s = v.slice(lo, hi - lo + 1);
            for i in 0..s.len() {
                prop_assert_eq!(s.get(i), v.get(lo + i));
            }
        }
    }
}
