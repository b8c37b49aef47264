//! Minimal complex CSR storage for operators and superoperators.
//!
//! The matrices here are small (Hilbert-space dimension up to a few hundred,
//! vectorized dimension up to a few ten-thousand) but very sparse, so a
//! hand-rolled CSR with COO assembly covers everything the solver needs:
//! matrix-vector products, transposition, Kronecker products and row-merge
//! matrix products. Exact zeros are dropped during assembly so the stored
//! pattern doubles as the coupling graph of the superoperator.

use ndarray::Array2;
use num_complex::Complex64;

/// Triplet accumulator. Duplicate entries are summed on `build`.
#[derive(Debug, Clone)]
pub struct CooBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl CooBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        CooBuilder {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        CooBuilder {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: Complex64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != Complex64::ZERO {
            self.entries.push((row, col, value));
        }
    }

    /// Add `scale * other` entry-by-entry.
    pub fn add_scaled(&mut self, other: &CsrMatrix, scale: Complex64) {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        for (i, j, v) in other.iter() {
            self.push(i, j, scale * v);
        }
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries
            .sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] = col_idx.len();
                last = Some((i, j));
            }
        }
        // forward-fill empty rows
        for r in 1..=self.nrows {
            if row_ptr[r] < row_ptr[r - 1] {
                row_ptr[r] = row_ptr[r - 1];
            }
        }
        let mut m = CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        };
        m.prune();
        m
    }
}

/// Compressed-sparse-row complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut b = CooBuilder::with_capacity(n, n, n);
        for i in 0..n {
            b.push(i, i, Complex64::ONE);
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
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[Complex64]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// Drop stored entries that are exactly zero.
    fn prune(&mut self) {
        if self.values.iter().all(|v| *v != Complex64::ZERO) {
            return;
        }
        let mut b = CooBuilder::with_capacity(self.nrows, self.ncols, self.nnz());
        for (i, j, v) in self.iter() {
            b.push(i, j, v);
        }
        *self = b.build();
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::ZERO; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut acc = Complex64::ZERO;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            *out = acc;
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut b = CooBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for (i, j, v) in self.iter() {
            b.push(j, i, v);
        }
        b.build()
    }

    pub fn conj(&self) -> CsrMatrix {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = v.conj();
        }
        out
    }

    pub fn adjoint(&self) -> CsrMatrix {
        self.transpose().conj()
    }

    pub fn scale(&self, s: Complex64) -> CsrMatrix {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out.prune();
        out
    }

    /// Row-merge sparse product `self * rhs`.
    pub fn matmul(&self, rhs: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, rhs.nrows, "matmul dimension mismatch");
        let mut b = CooBuilder::new(self.nrows, rhs.ncols);
        let mut acc: Vec<Complex64> = vec![Complex64::ZERO; rhs.ncols];
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&k, &aik) in cols.iter().zip(vals) {
                let (rcols, rvals) = rhs.row(k);
                for (&j, &bkj) in rcols.iter().zip(rvals) {
                    if acc[j] == Complex64::ZERO {
                        touched.push(j);
                    }
                    acc[j] += aik * bkj;
                }
            }
            for &j in &touched {
                b.push(i, j, acc[j]);
                acc[j] = Complex64::ZERO;
            }
            touched.clear();
        }
        b.build()
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &CsrMatrix) -> CsrMatrix {
        let nrows = self.nrows * rhs.nrows;
        let ncols = self.ncols * rhs.ncols;
        let mut b = CooBuilder::with_capacity(nrows, ncols, self.nnz() * rhs.nnz());
        for (ia, ja, va) in self.iter() {
            for (ib, jb, vb) in rhs.iter() {
                b.push(ia * rhs.nrows + ib, ja * rhs.ncols + jb, va * vb);
            }
        }
        b.build()
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for (i, j, v) in self.iter() {
            out[[i, j]] = v;
        }
        out
    }

    pub fn from_dense(dense: &Array2<Complex64>) -> CsrMatrix {
        let mut b = CooBuilder::new(dense.nrows(), dense.ncols());
        for ((i, j), &v) in dense.indexed_iter() {
            b.push(i, j, v);
        }
        b.build()
    }

    /// Extract the square submatrix on `idx × idx`. `pos[global] = local`
    /// must map every index of `idx` to its position.
    pub fn submatrix(&self, idx: &[usize], pos: &[Option<usize>]) -> Array2<Complex64> {
        let n = idx.len();
        let mut out = Array2::zeros((n, n));
        for (li, &gi) in idx.iter().enumerate() {
            let (cols, vals) = self.row(gi);
            for (&gj, &v) in cols.iter().zip(vals) {
                if let Some(lj) = pos[gj] {
                    out[[li, lj]] += v;
                }
            }
        }
        out
    }

    /// Connected components of the symmetrized sparsity pattern, restricted
    /// to the union of components touching any of `seeds`. Returns the
    /// sorted list of reachable indices.
    pub fn reachable_from(&self, seeds: &[usize]) -> Vec<usize> {
        assert_eq!(self.nrows, self.ncols);
        let tr = self.transpose();
        let mut seen = vec![false; self.nrows];
        let mut stack: Vec<usize> = Vec::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
        while let Some(i) = stack.pop() {
            for m in [self, &tr] {
                let (cols, _) = m.row(i);
                for &j in cols {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        (0..self.nrows).filter(|&i| seen[i]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
