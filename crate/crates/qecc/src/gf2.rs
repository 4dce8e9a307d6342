//! Bit-packed linear algebra over GF(2).
//!
//! A [`BitWord`] is a binary vector of up to 64 coordinates stored in one
//! machine word; a [`BinMatrix`] is a row-major stack of such vectors.
//! Coordinate `i` lives in bit `i` (the leftmost character of the text form
//! is coordinate 0), so a word doubles as a basis-state index downstream.
//! Elimination always selects the lowest-index pivot column first, which
//! makes reduced forms canonical and every derived object deterministic.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Hard cap on vector length: one word per vector.
pub const MAX_LEN: usize = 64;

/// Columns above this refuse full row-space enumeration.
pub const ENUM_COLS: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("vector length {0} exceeds {MAX_LEN}")]
    LengthTooLarge(usize),
    #[error("line {line}: unexpected character {ch:?} (rows are 0/1 only)")]
    BadChar { line: usize, ch: char },
    #[error("line {line}: row width {got} differs from {want}")]
    RaggedRow { line: usize, got: usize, want: usize },
    #[error("matrix text contains no rows")]
    EmptyMatrix,
    #[error("row space over {0} columns exceeds the enumeration cap of {ENUM_COLS}")]
    EnumerationCap(usize),
    #[error("target vector is not supported inside the error support")]
    OutsideSupport,
}

fn mask(len: usize) -> u64 {
    match len {
        0 => 0,
        64 => !0,
        _ => (1u64 << len) - 1,
    }
}

/// A fixed-length binary vector packed into a `u64`.
///
/// Length is set at creation and never changes. Mixed-length arithmetic is a
/// programming error and panics.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitWord {
    len: usize,
    bits: u64,
}

impl BitWord {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_LEN, "BitWord length {len} exceeds {MAX_LEN}");
        BitWord { len, bits: 0 }
    }

    pub fn ones(len: usize) -> Self {
        assert!(len <= MAX_LEN, "BitWord length {len} exceeds {MAX_LEN}");
        BitWord { len, bits: mask(len) }
    }

    /// Packs the low `len` bits of `bits`; higher bits are discarded.
    pub fn from_bits(len: usize, bits: u64) -> Self {
        assert!(len <= MAX_LEN, "BitWord length {len} exceeds {MAX_LEN}");
        BitWord { len, bits: bits & mask(len) }
    }

    pub fn from_support(len: usize, coords: &[usize]) -> Self {
        let mut w = BitWord::zeros(len);
        for &c in coords {
            w = w.with_bit(c, true);
        }
        w
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "coordinate {i} out of range for length {}", self.len);
        (self.bits >> i) & 1 == 1
    }

    pub fn with_bit(&self, i: usize, value: bool) -> Self {
        assert!(i < self.len, "coordinate {i} out of range for length {}", self.len);
        let bits = if value { self.bits | (1 << i) } else { self.bits & !(1 << i) };
        BitWord { len: self.len, bits }
    }

    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Hamming distance. Panics on length mismatch.
    pub fn distance(&self, other: &BitWord) -> usize {
        assert_eq!(self.len, other.len, "length mismatch in distance");
        (self.bits ^ other.bits).count_ones() as usize
    }

    /// GF(2) inner product. Panics on length mismatch.
    pub fn dot(&self, other: &BitWord) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        (self.bits & other.bits).count_ones() % 2 == 1
    }

    /// True when every set coordinate of `self` is also set in `support`.
    pub fn is_within(&self, support: &BitWord) -> bool {
        assert_eq!(self.len, support.len, "length mismatch in is_within");
        self.bits & !support.bits == 0
    }

    /// Projection onto `support`: agrees with `self` on its set coordinates,
    /// zero elsewhere. Always lies within `support`.
    pub fn restrict(&self, support: &BitWord) -> BitWord {
        assert_eq!(self.len, support.len, "length mismatch in restrict");
        BitWord {
            len: self.len,
            bits: self.bits & support.bits,
        }
    }

    /// Ascending list of set coordinates.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    /// Ordering key that matches the text form read left to right.
    pub fn lex_key(&self) -> u64 {
        if self.len == 0 {
            0
        } else {
            self.bits.reverse_bits() >> (64 - self.len)
        }
    }
}

impl std::ops::BitXor for BitWord {
    type Output = BitWord;
    fn bitxor(self, rhs: BitWord) -> BitWord {
        assert_eq!(self.len, rhs.len, "length mismatch in xor");
        BitWord { len: self.len, bits: self.bits ^ rhs.bits }
    }
}

impl std::ops::BitXorAssign for BitWord {
    fn bitxor_assign(&mut self, rhs: BitWord) {
        assert_eq!(self.len, rhs.len, "length mismatch in xor");
        self.bits ^= rhs.bits;
    }
}

impl std::ops::BitAnd for BitWord {
    type Output = BitWord;
    fn bitand(self, rhs: BitWord) -> BitWord {
        assert_eq!(self.len, rhs.len, "length mismatch in and");
        BitWord { len: self.len, bits: self.bits & rhs.bits }
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if (self.bits >> i) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

impl FromStr for BitWord {
    type Err = Gf2Error;

    fn from_str(s: &str) -> Result<Self, Gf2Error> {
        if s.len() > MAX_LEN {
            return Err(Gf2Error::LengthTooLarge(s.len()));
        }
        let mut bits = 0u64;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(Gf2Error::BadChar { line: 1, ch }),
            }
        }
        Ok(BitWord { len: s.len(), bits })
    }
}

/// Row-major binary matrix. Rows share a fixed column count.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinMatrix {
    cols: usize,
    rows: Vec<u64>,
}

impl BinMatrix {
    pub fn new(cols: usize) -> Self {
        assert!(cols <= MAX_LEN, "column count {cols} exceeds {MAX_LEN}");
        BinMatrix { cols, rows: Vec::new() }
    }

    pub fn from_rows(cols: usize, rows: &[BitWord]) -> Self {
        let mut m = BinMatrix::new(cols);
        for r in rows {
            m.push_row(*r);
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BinMatrix::new(n);
        for i in 0..n {
            m.rows.push(1u64 << i);
        }
        m
    }

    pub fn push_row(&mut self, row: BitWord) {
        assert_eq!(row.len(), self.cols, "row width mismatch");
        self.rows.push(row.bits());
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> BitWord {
        BitWord { len: self.cols, bits: self.rows[i] }
    }

    pub fn rows(&self) -> impl Iterator<Item = BitWord> + '_ {
        self.rows.iter().map(|&b| BitWord { len: self.cols, bits: b })
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(c < self.cols);
        (self.rows[r] >> c) & 1 == 1
    }

    /// Reduced row echelon form with zero rows dropped. Pivots are chosen at
    /// the lowest free column index, so the result is the canonical form of
    /// the row space: two matrices span the same code iff their `rref`s are
    /// identical.
    pub fn rref(&self) -> (BinMatrix, Vec<usize>) {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let Some(p) = (r..rows.len()).find(|&i| (rows[i] >> c) & 1 == 1) else {
                continue;
            };
            rows.swap(r, p);
            for i in 0..rows.len() {
                if i != r && (rows[i] >> c) & 1 == 1 {
                    rows[i] ^= rows[r];
                }
            }
            pivots.push(c);
            r += 1;
        }
        rows.truncate(r);
        (BinMatrix { cols: self.cols, rows }, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().0.nrows()
    }

    /// Every vector spanned by the rows, in ascending packed order.
    pub fn row_space(&self) -> Result<Vec<BitWord>, Gf2Error> {
        if self.cols > ENUM_COLS {
            return Err(Gf2Error::EnumerationCap(self.cols));
        }
        let (r, _) = self.rref();
        let k = r.nrows();
        let mut out = Vec::with_capacity(1 << k);
        for m in 0u64..(1 << k) {
            let mut v = 0u64;
            for (i, row) in r.rows.iter().enumerate() {
                if (m >> i) & 1 == 1 {
                    v ^= row;
                }
            }
            out.push(BitWord { len: self.cols, bits: v });
        }
        out.sort_unstable_by_key(|w| w.bits);
        Ok(out)
    }

    /// Generator of the dual space `{ v : v . c = 0 for all rows c }`,
    /// returned in canonical reduced form. `rank + dual rank = cols`.
    pub fn dual(&self) -> BinMatrix {
        let (r, pivots) = self.rref();
        let mut basis = BinMatrix::new(self.cols);
        let pivot_set: u64 = pivots.iter().map(|&c| 1u64 << c).sum();
        for f in 0..self.cols {
            if (pivot_set >> f) & 1 == 1 {
                continue;
            }
            let mut v = 1u64 << f;
            for (i, &p) in pivots.iter().enumerate() {
                if (r.rows[i] >> f) & 1 == 1 {
                    v |= 1u64 << p;
                }
            }
            basis.rows.push(v);
        }
        basis.rref().0
    }

    /// Parity-check style syndrome: bit `i` of the result is the inner
    /// product of row `i` with `v`.
    pub fn syndrome(&self, v: &BitWord) -> BitWord {
        assert_eq!(v.len(), self.cols, "vector length mismatch in syndrome");
        let mut s = 0u64;
        for (i, row) in self.rows.iter().enumerate() {
            if (row & v.bits()).count_ones() % 2 == 1 {
                s |= 1 << i;
            }
        }
        BitWord { len: self.rows.len(), bits: s }
    }

    /// Reduces `v` modulo the row space of an `rref` matrix. The result is
    /// the canonical coset representative; it is zero iff `v` is spanned.
    pub fn reduce(&self, pivots: &[usize], v: BitWord) -> BitWord {
        assert_eq!(v.len(), self.cols);
        let mut bits = v.bits();
        for (row, &p) in self.rows.iter().zip(pivots) {
            if (bits >> p) & 1 == 1 {
                bits ^= row;
            }
        }
        BitWord { len: self.cols, bits }
    }

    /// One row per line, `0`/`1` characters only. `#` lines are comments and
    /// blank lines are skipped; remaining rows must all share one width.
    pub fn from_text(text: &str) -> Result<BinMatrix, Gf2Error> {
        let mut rows: Vec<u64> = Vec::new();
        let mut cols = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.len() > MAX_LEN {
                return Err(Gf2Error::LengthTooLarge(line.len()));
            }
            let want = *cols.get_or_insert(line.len());
            if line.len() != want {
                return Err(Gf2Error::RaggedRow { line: lineno + 1, got: line.len(), want });
            }
            let mut bits = 0u64;
            for (i, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => bits |= 1 << i,
                    _ => return Err(Gf2Error::BadChar { line: lineno + 1, ch }),
                }
            }
            rows.push(bits);
        }
        match cols {
            None => Err(Gf2Error::EmptyMatrix),
            Some(c) => Ok(BinMatrix { cols: c, rows }),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in 0..self.nrows() {
            s.push_str(&self.row(r).to_string());
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for BinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinMatrix {}x{}", self.nrows(), self.cols)?;
        for r in 0..self.nrows() {
            writeln!(f, "  {}", self.row(r))?;
        }
        Ok(())
    }
}

/// Finds a vector in the row space of `gen` that agrees with `e` on every
/// coordinate of `support` (and is unconstrained elsewhere).
///
/// Returns `Ok(None)` when no spanned vector matches. Whenever
/// `support.weight()` is below the minimum distance of the dual of the
/// spanned code, a solution is guaranteed to exist.
pub fn solve_on_support(
    gen: &BinMatrix,
    support: &BitWord,
    e: &BitWord,
) -> Result<Option<BitWord>, Gf2Error> {
    assert_eq!(support.len(), gen.ncols(), "support length mismatch");
    assert_eq!(e.len(), gen.ncols(), "target length mismatch");
    if !e.is_within(support) {
        return Err(Gf2Error::OutsideSupport);
    }
    let k = gen.nrows();
    // One equation per supported coordinate: sum_i x_i gen[i][c] = e_c.
    // Each equation is packed as k coefficient bits plus a rhs flag.
    let mut eqs: Vec<(u64, bool)> = Vec::with_capacity(support.weight());
    let mut s = support.bits();
    while s != 0 {
        let c = s.trailing_zeros() as usize;
        let mut coeff = 0u64;
        for i in 0..k {
            if gen.get(i, c) {
                coeff |= 1 << i;
            }
        }
        eqs.push((coeff, e.get(c)));
        s &= s - 1;
    }
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (unknown, row)
    let mut used = 0;
    for unknown in 0..k {
        let Some(p) = (used..eqs.len()).find(|&i| (eqs[i].0 >> unknown) & 1 == 1) else {
            continue;
        };
        eqs.swap(used, p);
        let (pivot_coeff, pivot_rhs) = eqs[used];
        for (i, eq) in eqs.iter_mut().enumerate() {
            if i != used && (eq.0 >> unknown) & 1 == 1 {
                eq.0 ^= pivot_coeff;
                eq.1 ^= pivot_rhs;
            }
        }
        pivots.push((unknown, used));
        used += 1;
    }
    if eqs[used..].iter().any(|&(coeff, rhs)| coeff == 0 && rhs) {
        return Ok(None);
    }
    // Free unknowns stay zero, so each pivot unknown equals its row's final
    // right-hand side (rows may have been updated by later pivots).
    let mut x = 0u64;
    for &(unknown, row) in &pivots {
        if eqs[row].1 {
            x |= 1 << unknown;
        }
    }
    let mut v = BitWord::zeros(gen.ncols());
    for i in 0..k {
        if (x >> i) & 1 == 1 {
            v ^= gen.row(i);
        }
    }
    Ok(Some(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    fn hamming_gen() -> BinMatrix {
        BinMatrix::from_rows(7, &[w("1000101"), w("0100111"), w("0010110"), w("0001011")])
    }

    #[test]
    fn parse_display_roundtrip() {
        for s in ["", "0", "1", "0001011", "1111111"] {
            assert_eq!(w(s).to_string(), s);
        }
        assert_eq!(w("0001011").weight(), 3);
        assert!(w("").is_zero());
    }

    #[test]
    fn parse_rejects_bad_chars() {
        assert!(matches!("0a1".parse::<BitWord>(), Err(Gf2Error::BadChar { .. })));
    }

    #[test]
    fn coordinate_zero_is_leftmost() {
        let v = w("100");
        assert!(v.get(0));
        assert!(!v.get(1));
        assert_eq!(v.bits(), 1);
        assert_eq!(w("001").bits(), 4);
    }

    #[test]
    fn distance_matches_example() {
        assert_eq!(w("0000000").distance(&w("0001011")), 3);
    }

    #[test]
    fn restrict_projects_onto_support() {
        assert_eq!(w("1010011").restrict(&w("1110000")).to_string(), "1010000");
        assert_eq!(w("1111111").restrict(&w("0000000")).to_string(), "0000000");
        assert_eq!(w("1111111").restrict(&w("1100000")).to_string(), "1100000");
        assert!(w("1011").restrict(&w("1010")).is_within(&w("1010")));
    }

    #[test]
    fn support_lists_set_coordinates_ascending() {
        assert_eq!(w("1010011").support(), vec![0, 2, 5, 6]);
        assert!(w("0000").support().is_empty());
    }

    #[test]
    fn lex_key_orders_like_strings() {
        assert!(w("0001011").lex_key() < w("0010110").lex_key());
        assert!(w("1000000").lex_key() > w("0111111").lex_key());
    }

    #[test]
    fn matrix_text_roundtrip_and_comments() {
        let text = "# parity check\n101\n011\n";
        let m = BinMatrix::from_text(text).unwrap();
        assert_eq!(m.nrows(), 2);
        assert_eq!(m.to_text(), "101\n011\n");
    }

    #[test]
    fn matrix_text_rejects_ragged_and_empty() {
        assert!(matches!(
            BinMatrix::from_text("101\n01\n"),
            Err(Gf2Error::RaggedRow { line: 2, got: 2, want: 3 })
        ));
        assert!(matches!(BinMatrix::from_text("# only\n"), Err(Gf2Error::EmptyMatrix)));
        assert!(matches!(
            BinMatrix::from_text("10x\n"),
            Err(Gf2Error::BadChar { line: 1, ch: 'x' })
        ));
    }

    #[test]
    fn hamming_rank_and_dual() {
        let g = hamming_gen();
        assert_eq!(g.rank(), 4);
        let d = g.dual();
        assert_eq!(d.nrows(), 3);
        for r in d.rows() {
            for c in g.rows() {
                assert!(!r.dot(&c));
            }
        }
    }

    #[test]
    fn dual_of_zero_rows_is_identity_span() {
        let zero = BinMatrix::new(4);
        let d = zero.dual();
        assert_eq!(d.nrows(), 4);
        assert_eq!(d.rank(), 4);
    }

    #[test]
    fn dual_of_dual_restores_row_space() {
        let g = hamming_gen();
        let dd = g.dual().dual();
        assert_eq!(g.rref().0, dd.rref().0);
    }

    #[test]
    fn row_space_enumerates_and_caps() {
        let m = BinMatrix::from_rows(3, &[w("110"), w("011")]);
        let words: Vec<String> = m.row_space().unwrap().iter().map(|v| v.to_string()).collect();
        assert_eq!(words, ["000", "110", "101", "011"]);
        let wide = BinMatrix::new(25);
        assert!(matches!(wide.row_space(), Err(Gf2Error::EnumerationCap(25))));
    }

    #[test]
    fn syndrome_of_identity_is_the_vector() {
        let h = BinMatrix::identity(5);
        let v = w("01101");
        assert_eq!(h.syndrome(&v), v);
    }

    #[test]
    fn reduce_detects_membership() {
        let g = hamming_gen();
        let (r, piv) = g.rref();
        for cw in g.row_space().unwrap() {
            assert!(r.reduce(&piv, cw).is_zero());
        }
        assert!(!r.reduce(&piv, w("1100000")).is_zero());
    }

    #[test]
    fn solve_on_support_finds_matching_codeword() {
        let g = hamming_gen();
        let e = w("1000000");
        let v = solve_on_support(&g, &e, &e).unwrap().expect("solvable");
        assert!(v.get(0));
        let (r, piv) = g.rref();
        assert!(r.reduce(&piv, v).is_zero());
    }

    #[test]
    fn solve_on_support_agrees_with_exhaustive_scan() {
        let g = hamming_gen();
        let all = g.row_space().unwrap();
        for esupp in 0u64..(1 << 7) {
            let support = BitWord::from_bits(7, esupp);
            if support.weight() > 3 {
                continue;
            }
            let mut target = support.bits();
            loop {
                let e = BitWord::from_bits(7, target);
                let got = solve_on_support(&g, &support, &e).unwrap();
                let scan = all.iter().find(|c| c.restrict(&support) == e.restrict(&support));
                match (got, scan) {
                    (Some(v), Some(_)) => {
                        assert_eq!(v.restrict(&support), e.restrict(&support));
                    }
                    (None, None) => {}
                    (a, b) => panic!("solver {a:?} disagrees with scan {b:?}"),
                }
                if target == 0 {
                    break;
                }
                target = (target - 1) & support.bits();
            }
        }
    }

    #[test]
    fn solve_on_support_none_when_unreachable() {
        let g = BinMatrix::from_rows(4, &[w("1100")]);
        let support = w("1100");
        assert_eq!(solve_on_support(&g, &support, &w("1000")).unwrap(), None);
    }

    #[test]
    fn solve_on_support_rejects_target_outside_support() {
        let g = hamming_gen();
        let err = solve_on_support(&g, &w("1000000"), &w("0100000")).unwrap_err();
        assert_eq!(err, Gf2Error::OutsideSupport);
    }

    #[test]
    #[should_panic(expected = "length mismatch")]
    fn distance_panics_on_length_mismatch() {
        let _ = w("101").distance(&w("1010"));
    }

    proptest! {
        #[test]
        fn distance_is_weight_of_xor(a in any::<u64>(), b in any::<u64>(), len in 0usize..=64) {
            let va = BitWord::from_bits(len, a);
            let vb = BitWord::from_bits(len, b);
            prop_assert_eq!(va.distance(&vb), (va ^ vb).weight());
        }

        #[test]
        fn rank_plus_dual_rank_is_cols(
            rows in proptest::collection::vec(any::<u64>(), 0..8),
            cols in 1usize..=12,
        ) {
            let m = BinMatrix::from_rows(
                cols,
                &rows.iter().map(|&b| BitWord::from_bits(cols, b)).collect::<Vec<_>>(),
            );
            let d = m.dual();
            prop_assert_eq!(m.rank() + d.rank(), cols);
            for r in d.rows() {
                for c in m.rows() {
                    prop_assert!(!r.dot(&c));
                }
            }
        }

        #[test]
        fn rref_preserves_row_space(
            rows in proptest::collection::vec(any::<u64>(), 1..6),
            cols in 1usize..=10,
        ) {
            let m = BinMatrix::from_rows(
                cols,
                &rows.iter().map(|&b| BitWord::from_bits(cols, b)).collect::<Vec<_>>(),
            );
            prop_assert_eq!(m.row_space().unwrap(), m.rref().0.row_space().unwrap());
        }

        #[test]
        fn restrict_stays_within_support(a in any::<u64>(), s in any::<u64>(), len in 0usize..=64) {
            let v = BitWord::from_bits(len, a);
            let supp = BitWord::from_bits(len, s);
            let r = v.restrict(&supp);
            prop_assert_eq!(r.len(), len);
            prop_assert!(r.is_within(&supp));
            prop_assert_eq!(r, v & supp);
        }
    }
}
