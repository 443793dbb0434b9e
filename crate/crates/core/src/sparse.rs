//! Compressed-row complex matrices.
//!
//! Assembly goes through [`TripletBuilder`], which sorts entries by
//! `(row, col)` with a stable sort and sums duplicates in insertion order, so
//! the same sequence of pushes always yields bit-identical storage.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: C64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != ZERO {
            self.entries.push((row, col, value));
        }
    }

    pub fn build(mut self) -> SparseMatrix {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut data: Vec<C64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.nrows {
            indptr[r + 1] += indptr[r];
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            data,
        }
    }
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        TripletBuilder::new(nrows, ncols).build()
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![ONE; n])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut b = TripletBuilder::with_capacity(n, n, n);
        for (i, &d) in diag.iter().enumerate() {
            b.push(i, i, d);
        }
        b.build()
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut b = TripletBuilder::new(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                b.push(i, j, m[(i, j)]);
            }
        }
        b.build()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Iterates `(col, value)` over the stored entries of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.data[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.data[span.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            *yr = acc;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `y = A^† x`
    pub fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.ncols];
        for (r, &xr) in x.iter().enumerate().take(self.nrows) {
            for k in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[k]] += self.data[k].conj() * xr;
            }
        }
        y
    }

    pub fn adjoint(&self) -> SparseMatrix {
        let mut b = TripletBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for (r, c, v) in self.triplets() {
            b.push(c, r, v.conj());
        }
        b.build()
    }

    pub fn scaled(&self, a: C64) -> SparseMatrix {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= a;
        }
        out
    }

    /// `a * self + b * other`
    pub fn lin_comb(&self, a: C64, other: &SparseMatrix, b: C64) -> Result<SparseMatrix> {
        self.check_same_shape(other)?;
        let mut t = TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        for (r, c, v) in self.triplets() {
            t.push(r, c, a * v);
        }
        for (r, c, v) in other.triplets() {
            t.push(r, c, b * v);
        }
        Ok(t.build())
    }

    pub fn add(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        self.lin_comb(ONE, other, ONE)
    }

    pub fn sub(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        self.lin_comb(ONE, other, -ONE)
    }

    /// Sparse product `self * other` with a dense row accumulator.
    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                found: other.nrows,
            });
        }
        let mut acc = vec![ZERO; other.ncols];
        let mut touched = vec![false; other.ncols];
        let mut cols: Vec<usize> = Vec::new();
        let mut b = TripletBuilder::new(self.nrows, other.ncols);
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, v) in other.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        cols.push(c);
                    }
                    acc[c] += a * v;
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                b.push(r, c, acc[c]);
                acc[c] = ZERO;
                touched[c] = false;
            }
            cols.clear();
        }
        Ok(b.build())
    }

    /// `[self, other] = self*other - other*self`
    pub fn commutator(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Kronecker product; the index of `(i, k)` is `i * other.nrows + k`.
    pub fn kron(&self, other: &SparseMatrix) -> SparseMatrix {
        let (p, q) = (other.nrows, other.ncols);
        let mut b = TripletBuilder::with_capacity(self.nrows * p, self.ncols * q, self.nnz() * other.nnz());
        for (i, j, a) in self.triplets() {
            for (k, l, v) in other.triplets() {
                b.push(i * p + k, j * q + l, a * v);
            }
        }
        b.build()
    }

    /// Keeps the leading `n x n` block.
    pub fn leading_block(&self, n: usize) -> SparseMatrix {
        let mut b = TripletBuilder::new(n, n);
        for r in 0..n.min(self.nrows) {
            for (c, v) in self.row(r) {
                if c < n {
                    b.push(r, c, v);
                }
            }
        }
        b.build()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.nrows, self.ncols, ZERO);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A - A^†|` entrywise.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for (r, c, v) in self.triplets() {
            worst = worst.max((v - self.get(c, r).conj()).norm());
        }
        worst
    }

    /// Gershgorin-type upper bound on the spectral norm (max absolute row sum).
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    fn check_same_shape(&self, other: &SparseMatrix) -> Result<()> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.nrows * self.ncols,
                found: other.nrows * other.ncols,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn duplicates_are_summed() {
        let mut b = TripletBuilder::new(2, 2);
        b.push(1, 0, c(1.0, 0.0));
        b.push(0, 1, c(2.0, 0.0));
        b.push(1, 0, c(0.5, 1.0));
        let m = b.build();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 0), c(1.5, 1.0));
        assert_eq!(m.get(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn matmul_matches_dense() {
        let a = SparseMatrix::from_dense(&DMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64, (i as f64) - 1.0)));
        let b = SparseMatrix::from_dense(&DMatrix::from_fn(3, 3, |i, j| c((i * j) as f64, 0.5)));
        let prod = a.matmul(&b).unwrap().to_dense();
        let dense = a.to_dense() * b.to_dense();
        assert!((prod - dense).norm() < 1e-12);
    }

    #[test]
    fn kron_layout() {
        let a = SparseMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]));
        let i2 = SparseMatrix::identity(2);
        let k = a.kron(&i2);
        assert_eq!(k.get(0, 2), c(2.0, 0.0));
        assert_eq!(k.get(3, 1), c(3.0, 0.0));
        assert_eq!(k.get(1, 0), c(0.0, 0.0));
    }

    #[test]
    fn adjoint_matvec_agrees_with_adjoint() {
        let a = SparseMatrix::from_dense(&DMatrix::from_fn(3, 2, |i, j| c(i as f64, j as f64 + 0.25)));
        let x = [c(1.0, -1.0), c(0.5, 2.0), c(-3.0, 0.0)];
        let y1 = a.adjoint_matvec(&x);
        let y2 = a.adjoint().matvec(&x);
        assert_eq!(y1, y2);
    }

    #[test]
    fn hermitian_defect_detects_asymmetry() {
        let mut b = TripletBuilder::new(2, 2);
        b.push(0, 1, c(0.0, 1.0));
        b.push(1, 0, c(0.0, -1.0));
        assert_eq!(b.clone().build().hermitian_defect(), 0.0);
        b.push(1, 0, c(0.1, 0.0));
        assert!(b.build().hermitian_defect() > 0.09);
    }
}
