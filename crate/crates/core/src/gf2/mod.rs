//! Exact linear algebra over the two-element field.
//!
//! [`BitMatrix`] stores rows bit-packed into machine words and computes rank
//! by Gaussian elimination. The polar kernel powers `F_n` and the
//! bit-reversed generator `G_n` are built here, together with the
//! rectangle / rectangle-pair extraction used by the rank-sum verifier in
//! [`rank_sum`].
//!
//! Index conventions: [`IndexSet`] members are 1-based, as are the values of
//! [`bit_reversal_perm`]. Accessors on the matrices themselves (`get`, `set`)
//! are 0-based.

mod index_set;
pub mod rank_sum;

use std::fmt;

use crate::error::{invalid, Result};

pub use index_set::IndexSet;
pub use rank_sum::{
    min_rank_sum, verify_row_reduced, ColumnFamily, RankSumQuery, RankSumReport, RowReducedReport,
    SearchMode, Target,
};

const WORD: usize = 64;

/// Dense matrix over GF(2), rows packed into `u64` words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(WORD);
        BitMatrix {
            rows,
            cols,
            stride,
            words: vec![0; rows * stride],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from row slices of 0/1 values.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return invalid(format!("row {} has {} entries, expected {cols}", i + 1, row.len()));
            }
            for (j, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => m.set(i, j, true),
                    other => return invalid(format!("entry {other} is not a bit")),
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(row < self.rows && col < self.cols);
        self.words[row * self.stride + col / WORD] >> (col % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        debug_assert!(row < self.rows && col < self.cols);
        let w = &mut self.words[row * self.stride + col / WORD];
        let mask = 1u64 << (col % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// Packed words of one row; bit `j % 64` of word `j / 64` is column `j`.
    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.words[row * self.stride..(row + 1) * self.stride]
    }

    /// Row `row` as a 0/1 vector.
    pub fn row_bits(&self, row: usize) -> Vec<u8> {
        (0..self.cols).map(|c| self.get(row, c) as u8).collect()
    }

    /// Rank over GF(2). Empty matrices have rank 0.
    pub fn rank(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        let mut words = self.words.clone();
        let stride = self.stride;
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let (wi, bit) = (col / WORD, 1u64 << (col % WORD));
            let Some(pivot) = (rank..self.rows).find(|&r| words[r * stride + wi] & bit != 0) else {
                continue;
            };
            if pivot != rank {
                for k in 0..stride {
                    words.swap(pivot * stride + k, rank * stride + k);
                }
            }
            for r in rank + 1..self.rows {
                if words[r * stride + wi] & bit != 0 {
                    for k in wi..stride {
                        let v = words[rank * stride + k];
                        words[r * stride + k] ^= v;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Row-vector times matrix: `v · self`, with `v` given as 0/1 values.
    pub fn left_mul_vec(&self, v: &[u8]) -> Result<Vec<u8>> {
        if v.len() != self.rows {
            return invalid(format!("vector length {} != {} rows", v.len(), self.rows));
        }
        let mut acc = vec![0u64; self.stride];
        for (r, &b) in v.iter().enumerate() {
            if b & 1 == 1 {
                for (a, w) in acc.iter_mut().zip(self.row_words(r)) {
                    *a ^= w;
                }
            }
        }
        Ok((0..self.cols)
            .map(|c| (acc[c / WORD] >> (c % WORD) & 1) as u8)
            .collect())
    }

    /// Returns the matrix whose row `i` is row `perm[i]` of `self` (0-based).
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(perm.len(), self.cols);
        for (i, &src) in perm.iter().enumerate() {
            out.words[i * self.stride..(i + 1) * self.stride].copy_from_slice(self.row_words(src));
        }
        out
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

/// Plain dense matrix over an arbitrary element type. Used where only index
/// extraction matters (no arithmetic is defined on it).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> DenseMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return invalid("ragged rows");
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.cols + col]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        if self.cols == 0 {
            return vec![Vec::new(); self.rows];
        }
        self.data.chunks(self.cols).map(<[T]>::to_vec).collect()
    }
}

/// Row/column selection shared by [`BitMatrix`] and [`DenseMatrix`].
pub trait Submatrix: Sized {
    fn shape(&self) -> (usize, usize);
    /// Selects 0-based rows and columns, preserving the given order.
    fn select(&self, rows: &[usize], cols: &[usize]) -> Self;
}

impl Submatrix for BitMatrix {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = BitMatrix::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }
}

impl<T: Clone> Submatrix for DenseMatrix<T> {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let data = rows
            .iter()
            .flat_map(|&r| cols.iter().map(move |&c| self.get(r, c).clone()))
            .collect();
        DenseMatrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }
}

fn check_level(n: u32) -> Result<usize> {
    if n < 1 {
        return invalid("level n must be at least 1");
    }
    if n > 16 {
        return invalid(format!("level {n} is beyond the supported range"));
    }
    Ok(1usize << n)
}

/// `F_n` built by the block recursion `F_n = [[F_{n-1}, 0], [F_{n-1}, F_{n-1}]]`.
pub fn f_matrix(n: u32) -> Result<BitMatrix> {
    let size = check_level(n)?;
    let mut m = BitMatrix::zeros(size, size);
    m.set(0, 0, true);
    let mut half = 1;
    while half < size {
        for r in 0..half {
            for c in 0..half {
                if m.get(r, c) {
                    m.set(r + half, c, true);
                    m.set(r + half, c + half, true);
                }
            }
        }
        half *= 2;
    }
    Ok(m)
}

/// Bit-reversal permutation `σ` of `[2^n]`, 1-based: `perm[i - 1] = σ(i)`.
pub fn bit_reversal_perm(n: u32) -> Result<Vec<usize>> {
    let size = check_level(n)?;
    Ok((0..size)
        .map(|i| reverse_bits(i, n) + 1)
        .collect())
}

#[inline]
pub(crate) fn reverse_bits(i: usize, n: u32) -> usize {
    if n == 0 {
        return 0;
    }
    i.reverse_bits() >> (usize::BITS - n)
}

/// `G_n = B_n F_n`: row `i` of `G_n` is row `σ(i)` of `F_n`.
pub fn g_matrix(n: u32) -> Result<BitMatrix> {
    let f = f_matrix(n)?;
    let perm: Vec<usize> = bit_reversal_perm(n)?.into_iter().map(|s| s - 1).collect();
    Ok(f.permute_rows(&perm))
}

pub fn rank_f2(m: &BitMatrix) -> usize {
    m.rank()
}

fn to_zero_based(set: &IndexSet, bound: usize, what: &str) -> Result<Vec<usize>> {
    if let Some(&max) = set.members().last() {
        if max > bound {
            return invalid(format!("{what} index {max} exceeds dimension {bound}"));
        }
    }
    Ok(set.members().iter().map(|i| i - 1).collect())
}

/// The rectangle `m(r, c)`.
pub fn rectangle<M: Submatrix>(m: &M, r: &IndexSet, c: &IndexSet) -> Result<M> {
    let (rows, cols) = m.shape();
    let ri = to_zero_based(r, rows, "row")?;
    let ci = to_zero_based(c, cols, "column")?;
    Ok(m.select(&ri, &ci))
}

/// The rectangle pair `(m(r, c), m(r̄, c̄))`, complements taken in the
/// index sets' universes, which must match the matrix dimensions.
pub fn rectangle_pair<M: Submatrix>(m: &M, r: &IndexSet, c: &IndexSet) -> Result<(M, M)> {
    let (rows, cols) = m.shape();
    if r.universe() != rows || c.universe() != cols {
        return invalid(format!(
            "index universes ({}, {}) do not match matrix shape ({rows}, {cols})",
            r.universe(),
            c.universe()
        ));
    }
    Ok((rectangle(m, r, c)?, rectangle(m, &r.complement(), &c.complement())?))
}

/// Deletes rows `drop_a` (1-based) from the first matrix and `drop_b` from
/// the second, giving a `(|drop_a| + |drop_b|)`-row-reduced pair.
pub fn row_reduce_pair<M: Submatrix>(
    pair: (M, M),
    drop_a: &[usize],
    drop_b: &[usize],
) -> Result<(M, M)> {
    fn reduce<M: Submatrix>(m: M, drop: &[usize], which: &str) -> Result<M> {
        let (rows, cols) = m.shape();
        let mut sorted = drop.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != drop.len() {
            return invalid(format!("duplicate row index in {which} deletions"));
        }
        if let Some(&bad) = sorted.iter().find(|&&i| i == 0 || i > rows) {
            return invalid(format!("row {bad} out of range for {which} ({rows} rows)"));
        }
        if sorted.is_empty() {
            return Ok(m);
        }
        let keep: Vec<usize> = (0..rows).filter(|r| sorted.binary_search(&(r + 1)).is_err()).collect();
        let all_cols: Vec<usize> = (0..cols).collect();
        Ok(m.select(&keep, &all_cols))
    }
    let (a, b) = pair;
    Ok((reduce(a, drop_a, "first")?, reduce(b, drop_b, "second")?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows_of(m: &BitMatrix) -> Vec<String> {
        (0..m.rows())
            .map(|r| m.row_bits(r).iter().map(|b| char::from(b'0' + b)).collect())
            .collect()
    }

    #[test]
    fn f1_and_f2_literal() {
        assert_eq!(rows_of(&f_matrix(1).unwrap()), ["10", "11"]);
        assert_eq!(rows_of(&f_matrix(2).unwrap()), ["1000", "1100", "1010", "1111"]);
    }

    #[test]
    fn level_zero_rejected() {
        assert!(matches!(f_matrix(0), Err(crate::Error::InvalidArgument(_))));
        assert!(bit_reversal_perm(0).is_err());
        assert!(g_matrix(0).is_err());
    }

    #[test]
    fn bit_reversal_small() {
        assert_eq!(bit_reversal_perm(1).unwrap(), [1, 2]);
        assert_eq!(bit_reversal_perm(2).unwrap(), [1, 3, 2, 4]);
    }

    #[test]
    fn g1_equals_f1() {
        assert_eq!(g_matrix(1).unwrap(), f_matrix(1).unwrap());
        assert_eq!(rows_of(&g_matrix(2).unwrap()), ["1000", "1010", "1100", "1111"]);
    }

    #[test]
    fn full_rank_generators() {
        for n in 1..=8 {
            let size = 1 << n;
            assert_eq!(f_matrix(n).unwrap().rank(), size);
            assert_eq!(g_matrix(n).unwrap().rank(), size);
        }
    }

    #[test]
    fn rank_edge_cases() {
        assert_eq!(BitMatrix::zeros(3, 3).rank(), 0);
        assert_eq!(BitMatrix::zeros(0, 5).rank(), 0);
        assert_eq!(BitMatrix::zeros(5, 0).rank(), 0);
        let f2 = f_matrix(2).unwrap();
        let sub = rectangle(&f2, &IndexSet::new(4, [3, 4]).unwrap(), &IndexSet::new(4, [1, 2]).unwrap()).unwrap();
        assert_eq!(rows_of(&sub), ["10", "11"]);
        assert_eq!(rank_f2(&sub), 2);
        let zero = rectangle(&f2, &IndexSet::new(4, [1]).unwrap(), &IndexSet::new(4, [2, 3, 4]).unwrap()).unwrap();
        assert_eq!(rank_f2(&zero), 0);
    }

    #[test]
    fn rank_wide_matrix_crosses_word_boundary() {
        let mut m = BitMatrix::zeros(3, 130);
        m.set(0, 129, true);
        m.set(1, 129, true);
        m.set(1, 3, true);
        m.set(2, 64, true);
        assert_eq!(m.rank(), 3);
        m.set(2, 3, true);
        m.set(2, 64, false);
        m.set(2, 129, false);
        // row2 = e3 = row0 ^ row1
        assert_eq!(m.rank(), 2);
    }

    fn demo() -> DenseMatrix<i32> {
        DenseMatrix::from_rows((0..4).map(|r| (1..=4).map(|c| r * 4 + c).collect()).collect()).unwrap()
    }

    #[test]
    fn demo_rectangle_and_pair() {
        let g = demo();
        let r = IndexSet::new(4, [1, 3]).unwrap();
        let c = IndexSet::new(4, [2, 4]).unwrap();
        assert_eq!(rectangle(&g, &r, &c).unwrap().to_rows(), vec![vec![2, 4], vec![10, 12]]);
        let (a, b) = rectangle_pair(&g, &r, &c).unwrap();
        assert_eq!(a.to_rows(), vec![vec![2, 4], vec![10, 12]]);
        assert_eq!(b.to_rows(), vec![vec![5, 7], vec![13, 15]]);
        let (x, y) = row_reduce_pair((a, b), &[1], &[]).unwrap();
        assert_eq!(x.to_rows(), vec![vec![10, 12]]);
        assert_eq!(y.to_rows(), vec![vec![5, 7], vec![13, 15]]);
    }

    #[test]
    fn rectangle_degenerate_sets() {
        let f2 = f_matrix(2).unwrap();
        let empty = IndexSet::empty(4);
        let full = IndexSet::full(4);
        let e = rectangle(&f2, &empty, &IndexSet::new(4, [1, 2]).unwrap()).unwrap();
        assert_eq!((e.rows(), e.cols()), (0, 2));
        let (a, b) = rectangle_pair(&f2, &full, &full).unwrap();
        assert_eq!(a, f2);
        assert!(b.is_empty());
        let (a, b) = rectangle_pair(&f2, &empty, &full).unwrap();
        assert!(a.is_empty() && b.is_empty());
        let f1 = f_matrix(1).unwrap();
        let one = rectangle(&f1, &IndexSet::new(2, [1]).unwrap(), &IndexSet::new(2, [2]).unwrap()).unwrap();
        assert_eq!(rows_of(&one), ["0"]);
    }

    #[test]
    fn rectangle_out_of_range() {
        let f1 = f_matrix(1).unwrap();
        let r = IndexSet::new(4, [3]).unwrap();
        assert!(rectangle(&f1, &r, &IndexSet::full(2)).is_err());
        assert!(rectangle_pair(&f1, &r, &IndexSet::full(2)).is_err());
    }

    #[test]
    fn row_reduce_identity_and_errors() {
        let g = demo();
        let pair = rectangle_pair(&g, &IndexSet::new(4, [1, 3]).unwrap(), &IndexSet::new(4, [2, 4]).unwrap()).unwrap();
        let same = row_reduce_pair(pair.clone(), &[], &[]).unwrap();
        assert_eq!(same, pair);
        assert!(row_reduce_pair(pair.clone(), &[3], &[]).is_err());
        assert!(row_reduce_pair(pair.clone(), &[0], &[]).is_err());
        assert!(row_reduce_pair(pair, &[1, 1], &[]).is_err());
    }

    #[test]
    fn left_mul_matches_rows() {
        let g = g_matrix(3).unwrap();
        let mut v = vec![0u8; 8];
        v[2] = 1;
        v[5] = 1;
        let out = g.left_mul_vec(&v).unwrap();
        let expect: Vec<u8> = (0..8).map(|c| (g.get(2, c) ^ g.get(5, c)) as u8).collect();
        assert_eq!(out, expect);
        assert!(g.left_mul_vec(&v[..3]).is_err());
    }
}
