use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::bitvec::{words_for, BitVec};
use crate::error::{shape_err, Error, Result};

/// Dense matrix over GF(2), row-major, each row packed into 64-bit words.
///
/// Padding bits past `cols` in every row are kept at zero so that derived
/// equality and hashing are entrywise.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Reduced row echelon form of a matrix together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub reduced: BitMatrix,
    /// `pivots[i]` is the pivot column of row `i`; rows past `pivots.len()` are zero.
    pub pivots: Vec<usize>,
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

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from 0/1 rows. Panics on ragged input.
    pub fn from_dense(rows: &[&[u8]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged dense matrix");
            for (j, &b) in r.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, ones: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (r, c) in ones {
            m.set(r, c, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[BitVec]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row length mismatch");
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        m
    }

    /// A single-row matrix.
    pub fn row_matrix(v: &BitVec) -> Self {
        Self::from_rows(v.len(), std::slice::from_ref(v))
    }

    /// A single-column matrix.
    pub fn col_matrix(v: &BitVec) -> Self {
        Self::from_entries(v.len(), 1, v.iter_ones().map(|i| (i, 0)))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds {}x{}", self.rows, self.cols);
        let w = &mut self.data[r * self.stride + c / 64];
        let mask = 1u64 << (c % 64);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols);
        self.data[r * self.stride + c / 64] ^= 1u64 << (c % 64);
    }

    #[inline]
    pub(crate) fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub(crate) fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVec {
        BitVec::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn col(&self, c: usize) -> BitVec {
        BitVec::from_indices(self.rows, (0..self.rows).filter(|&r| self.get(r, c)))
    }

    pub fn row_iter(&self) -> impl Iterator<Item = BitVec> + '_ {
        (0..self.rows).map(|r| self.row(r))
    }

    pub fn row_ones(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.row_words(r).iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    /// Nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |r| self.row_ones(r).map(move |c| (r, c)))
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn weight(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// `rows[dst] ^= rows[src]`.
    #[inline]
    pub(crate) fn xor_rows(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let s = self.stride;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s])
        };
        for (x, y) in a.iter_mut().zip(b) {
            *x ^= y;
        }
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for (r, c) in self.entries() {
            t.set(c, r, true);
        }
        t
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(
            self.cols, other.rows,
            "product of {}x{} by {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let base = r * out.stride;
            for k in self.row_ones(r) {
                let src = other.row_words(k);
                for (d, s) in out.data[base..base + out.stride].iter_mut().zip(src) {
                    *d ^= s;
                }
            }
        }
        out
    }

    /// `self · vᵀ` as a vector of length `rows`.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(self.cols, v.len(), "matrix-vector length mismatch");
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            let parity = self
                .row_words(r)
                .iter()
                .zip(v.words())
                .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones());
            if parity & 1 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// `v · self` as a vector of length `cols`.
    pub fn vec_mul(&self, v: &BitVec) -> BitVec {
        assert_eq!(self.rows, v.len(), "vector-matrix length mismatch");
        let mut out = BitVec::zeros(self.cols);
        for r in v.iter_ones() {
            for (d, s) in out.words_mut().iter_mut().zip(self.row_words(r)) {
                *d ^= s;
            }
        }
        out
    }

    pub fn add(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.shape(), other.shape(), "sum of mismatched shapes");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a ^= b;
        }
        out
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        let mut out = BitMatrix::zeros(self.rows, self.cols + other.cols);
        for (r, c) in self.entries() {
            out.set(r, c, true);
        }
        for (r, c) in other.entries() {
            out.set(r, self.cols + c, true);
        }
        out
    }

    /// `[self ; other]`.
    pub fn vstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut out = BitMatrix::zeros(self.rows + other.rows, self.cols);
        out.data[..self.data.len()].copy_from_slice(&self.data);
        out.data[self.data.len()..].copy_from_slice(&other.data);
        out
    }

    /// Block matrix from a grid of blocks; every block row must agree on row
    /// count and every block column on column count.
    pub fn block(grid: &[&[&BitMatrix]]) -> BitMatrix {
        let mut out: Option<BitMatrix> = None;
        for row in grid {
            let mut acc = row[0].clone();
            for b in &row[1..] {
                acc = acc.hstack(b);
            }
            out = Some(match out {
                None => acc,
                Some(o) => o.vstack(&acc),
            });
        }
        out.unwrap_or_default()
    }

    pub fn select_rows(&self, rows: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            out.row_words_mut(i).copy_from_slice(self.row_words(r));
        }
        out
    }

    pub fn select_cols(&self, cols: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }

    /// Rows `[start, start + len)`.
    pub fn row_range(&self, start: usize, len: usize) -> BitMatrix {
        let idx: Vec<usize> = (start..start + len).collect();
        self.select_rows(&idx)
    }

    /// Columns `[start, start + len)`.
    pub fn col_range(&self, start: usize, len: usize) -> BitMatrix {
        let idx: Vec<usize> = (start..start + len).collect();
        self.select_cols(&idx)
    }

    /// Reduced row echelon form by Gauss-Jordan elimination.
    pub fn echelon(&self) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| m.get(r, col)) else {
                continue;
            };
            m.swap_rows(row, p);
            for r in 0..self.rows {
                if r != row && m.get(r, col) {
                    m.xor_rows(r, row);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { reduced: m, pivots }
    }

    pub fn rank(&self) -> usize {
        // Forward elimination only; cheaper than the full reduction.
        let mut m = self.clone();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| m.get(r, col)) else {
                continue;
            };
            m.swap_rows(row, p);
            for r in row + 1..self.rows {
                if m.get(r, col) {
                    m.xor_rows(r, row);
                }
            }
            row += 1;
        }
        row
    }

    /// Solves `self · x = b`. Free variables are set to zero, which makes the
    /// returned solution unique for a given input.
    pub fn solve_right(&self, b: &BitMatrix) -> Result<BitMatrix> {
        if self.rows != b.rows {
            return Err(shape_err(format!(
                "solve_right: a is {}x{}, b is {}x{}",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let aug = self.hstack(b);
        let mut m = aug;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| m.get(r, col)) else {
                continue;
            };
            m.swap_rows(row, p);
            for r in 0..self.rows {
                if r != row && m.get(r, col) {
                    m.xor_rows(r, row);
                }
            }
            pivots.push(col);
            row += 1;
        }
        for r in row..self.rows {
            if (0..b.cols).any(|j| m.get(r, self.cols + j)) {
                return Err(Error::NoSolution);
            }
        }
        let mut x = BitMatrix::zeros(self.cols, b.cols);
        for (i, &p) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                if m.get(i, self.cols + j) {
                    x.set(p, j, true);
                }
            }
        }
        Ok(x)
    }

    /// Solves `self · xᵀ = b` for a single right-hand side.
    pub fn solve_vec(&self, b: &BitVec) -> Result<BitVec> {
        let x = self.solve_right(&BitMatrix::col_matrix(b))?;
        Ok(x.col(0))
    }

    /// Basis of the right kernel `{v : self · vᵀ = 0}`, one vector per row.
    pub fn kernel_basis(&self) -> BitMatrix {
        let ech = self.echelon();
        let is_pivot = {
            let mut f = vec![false; self.cols];
            for &p in &ech.pivots {
                f[p] = true;
            }
            f
        };
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut out = BitMatrix::zeros(free.len(), self.cols);
        for (k, &f) in free.iter().enumerate() {
            out.set(k, f, true);
            for (i, &p) in ech.pivots.iter().enumerate() {
                if ech.reduced.get(i, f) {
                    out.set(k, p, true);
                }
            }
        }
        out
    }

    /// Some `r` with `self · r = E`; requires full row rank.
    pub fn right_inverse(&self) -> Result<BitMatrix> {
        self.solve_right(&BitMatrix::identity(self.rows))
    }

    /// Kronecker product.
    pub fn kron(&self, other: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for (r, c) in self.entries() {
            for (r2, c2) in other.entries() {
                out.set(r * other.rows + r2, c * other.cols + c2, true);
            }
        }
        out
    }

    /// Block-diagonal `[[self, 0], [0, other]]`.
    pub fn direct_sum(&self, other: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for (r, c) in self.entries() {
            out.set(r, c, true);
        }
        for (r, c) in other.entries() {
            out.set(self.rows + r, self.cols + c, true);
        }
        out
    }

    /// Column-stacking vectorization: entry `(r, c)` lands at index `c·rows + r`.
    ///
    /// With this convention `vec(A·X·B) = (Bᵀ ⊗ A)·vec(X)`.
    pub fn vectorize(&self) -> BitVec {
        BitVec::from_indices(self.rows * self.cols, self.entries().map(|(r, c)| c * self.rows + r))
    }

    /// Inverse of [`BitMatrix::vectorize`].
    pub fn unvectorize(v: &BitVec, rows: usize, cols: usize) -> Result<BitMatrix> {
        if v.len() != rows * cols {
            return Err(shape_err(format!(
                "unvectorize: length {} does not match {}x{}",
                v.len(),
                rows,
                cols
            )));
        }
        Ok(BitMatrix::from_entries(rows, cols, v.iter_ones().map(|i| (i % rows, i / rows))))
    }

    /// Writes the sparse text format: a `rows cols` header followed by one
    /// `r c` line per nonzero entry in ascending row-major order.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.rows, self.cols)?;
        for (r, c) in self.entries() {
            writeln!(w, "{r} {c}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<BitMatrix> {
        let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(s) if s.trim().is_empty() => None,
            other => Some((i + 1, other)),
        });
        let parse_pair = |line: usize, s: &str| -> Result<(usize, usize)> {
            let mut it = s.split_whitespace();
            let bad = || Error::Parse {
                line,
                msg: format!("expected two integers, got {s:?}"),
            };
            let a = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let b = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if it.next().is_some() {
                return Err(bad());
            }
            Ok((a, b))
        };
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let (rows, cols) = parse_pair(line, &header?)?;
        let mut m = BitMatrix::zeros(rows, cols);
        let mut last: Option<(usize, usize)> = None;
        for (line, text) in lines {
            let (r, c) = parse_pair(line, &text?)?;
            if r >= rows || c >= cols {
                return Err(Error::Parse {
                    line,
                    msg: format!("entry ({r},{c}) outside {rows}x{cols}"),
                });
            }
            if last.is_some_and(|l| l >= (r, c)) {
                return Err(Error::Parse {
                    line,
                    msg: "entries must be strictly ascending".into(),
                });
            }
            last = Some((r, c));
            m.set(r, c, true);
        }
        Ok(m)
    }

    pub fn from_text(s: &str) -> Result<BitMatrix> {
        Self::read_text(s.as_bytes())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", self.get(r, c) as u8)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[u8]]) -> BitMatrix {
        BitMatrix::from_dense(rows)
    }

    #[test]
    fn rank_examples() {
        assert_eq!(m(&[&[1, 1], &[1, 1]]).rank(), 1);
        assert_eq!(BitMatrix::identity(3).rank(), 3);
        assert_eq!(BitMatrix::zeros(2, 5).rank(), 0);
    }

    #[test]
    fn solve_right_examples() {
        let x = BitMatrix::identity(2).solve_right(&m(&[&[1], &[0]])).unwrap();
        assert_eq!(x, m(&[&[1], &[0]]));

        let a = m(&[&[1, 1]]);
        let b = m(&[&[1]]);
        let x = a.solve_right(&b).unwrap();
        assert_eq!(a.mul(&x), b);
        // free variable set to zero
        assert_eq!(x, m(&[&[1], &[0]]));

        assert!(matches!(m(&[&[0, 0]]).solve_right(&b), Err(Error::NoSolution)));
    }

    #[test]
    fn kernel_examples() {
        let k = m(&[&[1, 1, 0], &[0, 1, 1]]).kernel_basis();
        assert_eq!(k, m(&[&[1, 1, 1]]));
        assert_eq!(BitMatrix::identity(3).kernel_basis().rows(), 0);
        assert_eq!(BitMatrix::zeros(1, 2).kernel_basis().rows(), 2);
    }

    #[test]
    fn right_inverse_examples() {
        let a = m(&[&[1, 1], &[0, 1]]);
        let r = a.right_inverse().unwrap();
        assert_eq!(a.mul(&r), BitMatrix::identity(2));
        assert_eq!(r, a);

        let a = m(&[&[1, 0, 1]]);
        let r = a.right_inverse().unwrap();
        assert_eq!(a.mul(&r), BitMatrix::identity(1));

        assert!(matches!(m(&[&[1, 1], &[1, 1]]).right_inverse(), Err(Error::NoSolution)));
    }

    #[test]
    fn kron_examples() {
        let k = BitMatrix::identity(2).kron(&m(&[&[1, 1]]));
        assert_eq!(k, m(&[&[1, 1, 0, 0], &[0, 0, 1, 1]]));
        let a = m(&[&[1, 0, 1], &[0, 1, 1]]);
        assert_eq!(a.kron(&BitMatrix::identity(1)), a);
        assert_eq!(m(&[&[1], &[1]]).kron(&m(&[&[1]])), m(&[&[1], &[1]]));
    }

    #[test]
    fn direct_sum_examples() {
        let e1 = BitMatrix::identity(1);
        assert_eq!(e1.direct_sum(&e1), BitMatrix::identity(2));
        let a = m(&[&[1, 1, 0], &[0, 1, 1]]);
        let b = m(&[&[1, 1]]);
        let s = a.direct_sum(&b);
        assert_eq!(s.shape(), (3, 5));
        assert_eq!(s.select_rows(&[0, 1]).col_range(3, 2), BitMatrix::zeros(2, 2));
        assert_eq!(s.select_rows(&[2]).col_range(0, 3), BitMatrix::zeros(1, 3));
        assert_eq!(a.direct_sum(&BitMatrix::zeros(0, 0)), a);
    }

    #[test]
    fn vectorize_identity() {
        let v = BitMatrix::identity(2).vectorize();
        assert_eq!(v.len(), 4);
        assert_eq!(v.weight(), 2);
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![0, 3]);
        assert!(BitMatrix::unvectorize(&v, 3, 2).is_err());
    }

    #[test]
    fn text_roundtrip_and_errors() {
        let a = m(&[&[1, 0, 1], &[0, 0, 0], &[0, 1, 0]]);
        let t = a.to_text();
        assert_eq!(t, "3 3\n0 0\n0 2\n2 1\n");
        assert_eq!(BitMatrix::from_text(&t).unwrap(), a);
        assert!(BitMatrix::from_text("2 2\n1 1\n0 0\n").is_err());
        assert!(BitMatrix::from_text("2 2\n2 0\n").is_err());
        assert!(BitMatrix::from_text("").is_err());
    }

    #[test]
    fn padding_stays_clear() {
        let a = BitMatrix::from_entries(3, 70, [(0, 69), (2, 3)]);
        let b = a.transpose().transpose();
        assert_eq!(a, b);
        assert_eq!(a.vstack(&a).weight(), 4);
    }
}
