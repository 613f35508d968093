//! Dense linear algebra over GF(2).
//!
//! Rows are packed into `u64` words so that every row operation is a
//! word-parallel XOR. Elimination always pivots on the first nonzero row
//! (top to bottom) of the leftmost remaining column, which keeps every
//! output reproducible bit for bit.

mod poly;

pub use poly::{circulant, poly_gcd, Gf2Poly};

use std::fmt;

const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[inline]
pub(crate) fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

#[inline]
pub(crate) fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
}

#[inline]
pub(crate) fn first_one(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .position(|&w| w != 0)
        .map(|wi| wi * WORD_BITS + words[wi].trailing_zeros() as usize)
}

/// A fixed-length bit vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector of length `len` with ones at `indices`.
    ///
    /// Panics if an index is out of range.
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.set(i, true);
        }
        v
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        Self { len, words }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        get_bit(&self.words, i)
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch");
        xor_words(&mut self.words, &other.words);
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        assert_eq!(self.len, other.len, "length mismatch");
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        BitVec::from_words(self.len, words)
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    /// Indices of the set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let tz = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * WORD_BITS + tz)
                }
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Dense row-major binary matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    /// Stacks equally long bit vectors as rows. `cols` is needed for the
    /// zero-row case.
    pub fn from_rows(cols: usize, rows: &[BitVec]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, v) in rows.iter().enumerate() {
            assert_eq!(v.len(), cols, "row {r} has length {} != {cols}", v.len());
            m.row_words_mut(r).copy_from_slice(v.words());
        }
        m
    }

    /// Parses a nested 0/1 table. Returns `None` on ragged rows or entries
    /// other than 0 and 1.
    pub fn from_dense<T: AsRef<[u8]>>(cols: usize, table: &[T]) -> Option<Self> {
        let mut m = Self::zeros(table.len(), cols);
        for (r, row) in table.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return None;
            }
            for (c, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => m.set(r, c, true),
                    _ => return None,
                }
            }
        }
        Some(m)
    }

    /// Parses rows written as strings of `0`/`1` characters.
    ///
    /// Panics on malformed input; intended for literals.
    pub fn from_strs(rows: &[&str]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let table: Vec<Vec<u8>> = rows
            .iter()
            .map(|r| {
                r.bytes()
                    .map(|b| match b {
                        b'0' => 0,
                        b'1' => 1,
                        _ => panic!("invalid bit character {:?}", b as char),
                    })
                    .collect()
            })
            .collect();
        Self::from_dense(cols, &table).expect("ragged matrix literal")
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) as u8).collect())
            .collect()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        get_bit(self.row_words(r), c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        let mask = 1u64 << (c % WORD_BITS);
        let w = &mut self.data[r * self.stride + c / WORD_BITS];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub(crate) fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVec {
        assert!(r < self.rows, "row {r} out of range");
        BitVec::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn row_iter(&self) -> impl Iterator<Item = BitVec> + '_ {
        (0..self.rows).map(|r| self.row(r))
    }

    /// Column indices of the ones in row `r`.
    pub fn row_support(&self, r: usize) -> Vec<usize> {
        self.row(r).iter_ones().collect()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn col_weight(&self, c: usize) -> usize {
        (0..self.rows).filter(|&r| self.get(r, c)).count()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// `rows[dst] ^= rows[src]`.
    fn xor_row(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let stride = self.stride;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * stride);
            (&mut lo[dst * stride..(dst + 1) * stride], &hi[..stride])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * stride);
            (&mut hi[..stride], &lo[src * stride..(src + 1) * stride])
        };
        xor_words(a, b);
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row(r).iter_ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Matrix product `self · other` over GF(2).
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(
            self.cols, other.rows,
            "dimension mismatch: {}x{} · {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in self.row(r).iter_ones() {
                let src = other.row_words(k).to_vec();
                xor_words(out.row_words_mut(r), &src);
            }
        }
        out
    }

    /// `self · otherᵀ`, computed from row inner products.
    pub fn mul_transpose(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "column count mismatch");
        let mut out = BitMatrix::zeros(self.rows, other.rows);
        for r in 0..self.rows {
            let a = self.row_words(r);
            for s in 0..other.rows {
                let b = other.row_words(s);
                let parity = a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum::<u32>() % 2;
                if parity == 1 {
                    out.set(r, s, true);
                }
            }
        }
        out
    }

    /// `self · v` for a column vector `v`.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(self.cols, v.len(), "length mismatch");
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            let parity = self
                .row_words(r)
                .iter()
                .zip(v.words())
                .map(|(x, y)| (x & y).count_ones())
                .sum::<u32>()
                % 2;
            if parity == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.rows, other.rows, "row count mismatch");
        let mut out = BitMatrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in self.row(r).iter_ones() {
                out.set(r, c, true);
            }
            for c in other.row(r).iter_ones() {
                out.set(r, self.cols + c, true);
            }
        }
        out
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn vstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "column count mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        BitMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            stride: self.stride,
            data,
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            out.row_words_mut(i).copy_from_slice(self.row_words(r));
        }
        out
    }

    pub fn select_columns(&self, cols: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            let words = self.row_words(r);
            for (j, &c) in cols.iter().enumerate() {
                if get_bit(words, c) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }

    /// Forward elimination in place; returns the pivot columns. When `reduce`
    /// is set, pivots are also cleared above (reduced row-echelon form).
    /// `companion` receives the same row operations.
    fn eliminate(&mut self, reduce: bool, mut companion: Option<&mut BitMatrix>) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..self.cols {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&r| get_bit(self.row_words(r), c)) else {
                continue;
            };
            self.swap_rows(p, next);
            if let Some(t) = companion.as_deref_mut() {
                t.swap_rows(p, next);
            }
            let start = if reduce { 0 } else { next + 1 };
            for r in start..self.rows {
                if r != next && get_bit(self.row_words(r), c) {
                    self.xor_row(r, next);
                    if let Some(t) = companion.as_deref_mut() {
                        t.xor_row(r, next);
                    }
                }
            }
            pivots.push(c);
            next += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().eliminate(false, None).len()
    }

    /// Reduced row-echelon form and its (strictly increasing) pivot columns.
    /// Zero rows are kept at the bottom so the shape is unchanged.
    pub fn rref(&self) -> (BitMatrix, Vec<usize>) {
        let mut r = self.clone();
        let pivots = r.eliminate(true, None);
        (r, pivots)
    }

    /// The nonzero rows of the reduced row-echelon form.
    pub fn row_basis(&self) -> BitMatrix {
        let (r, pivots) = self.rref();
        r.select_rows(&(0..pivots.len()).collect::<Vec<_>>())
    }

    /// Finds `x` with `xᵀ · self = v`, or `None` when `v` is outside the row
    /// space. Free variables are set to zero.
    pub fn solve_in_row_span(&self, v: &BitVec) -> Option<BitVec> {
        RowSpanSolver::new(self).solve(v)
    }

    /// Basis of `{x : self · x = 0}`, one vector per row of the result.
    pub fn kernel(&self) -> BitMatrix {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut out = BitMatrix::zeros(free.len(), self.cols);
        for (i, &f) in free.iter().enumerate() {
            out.set(i, f, true);
            for (row, &p) in pivots.iter().enumerate() {
                if r.get(row, f) {
                    out.set(i, p, true);
                }
            }
        }
        out
    }

    /// Inverse of a square matrix, if it exists.
    pub fn inverse(&self) -> Option<BitMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let mut a = self.clone();
        let mut inv = BitMatrix::identity(self.rows);
        let pivots = a.eliminate(true, Some(&mut inv));
        (pivots.len() == self.rows).then_some(inv)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r))?;
        }
        write!(f, "]")
    }
}

/// Echelon form of a matrix together with the row operations that produced
/// it, so that repeated membership queries share one elimination.
#[derive(Debug, Clone)]
pub struct RowSpanSolver {
    echelon: BitMatrix,
    transform: BitMatrix,
    pivots: Vec<usize>,
}

impl RowSpanSolver {
    pub fn new(m: &BitMatrix) -> Self {
        let mut echelon = m.clone();
        let mut transform = BitMatrix::identity(m.rows());
        let pivots = echelon.eliminate(true, Some(&mut transform));
        Self {
            echelon,
            transform,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn solve(&self, v: &BitVec) -> Option<BitVec> {
        assert_eq!(v.len(), self.echelon.cols(), "target length mismatch");
        let mut rest = v.words().to_vec();
        let mut coeffs = vec![0u64; words_for(self.echelon.rows())];
        for (row, &p) in self.pivots.iter().enumerate() {
            if get_bit(&rest, p) {
                xor_words(&mut rest, self.echelon.row_words(row));
                xor_words(&mut coeffs, self.transform.row_words(row));
            }
        }
        rest.iter()
            .all(|&w| w == 0)
            .then(|| BitVec::from_words(self.echelon.rows(), coeffs))
    }
}
