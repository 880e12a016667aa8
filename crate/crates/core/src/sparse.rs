//! Compressed sparse row matrices and a triplet accumulator.

use nalgebra::DMatrix;

/// Coordinate-format accumulator; duplicates are summed on conversion.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    /// Scatter a dense local matrix `local[(a, b)]` to `(rows[a], cols[b])`.
    pub fn add_local(&mut self, rows: &[usize], cols: &[usize], local: &DMatrix<f64>) {
        for (a, &r) in rows.iter().enumerate() {
            for (b, &c) in cols.iter().enumerate() {
                self.push(r, c, local[(a, b)]);
            }
        }
    }

    /// Add `scale * m` with its origin shifted to `(r0, c0)`.
    pub fn add_csr(&mut self, m: &CsrMatrix, r0: usize, c0: usize, scale: f64) {
        for i in 0..m.nrows {
            for (j, v) in m.row(i) {
                self.push(r0 + i, c0 + j, scale * v);
            }
        }
    }

    /// Add `scale * mᵀ` with its origin shifted to `(r0, c0)`.
    pub fn add_csr_transposed(&mut self, m: &CsrMatrix, r0: usize, c0: usize, scale: f64) {
        for i in 0..m.nrows {
            for (j, v) in m.row(i) {
                self.push(r0 + j, c0 + i, scale * v);
            }
        }
    }

    pub fn append(&mut self, other: Triplets) {
        self.entries.extend(other.entries);
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.nrows + 1];
        for &(i, _, _) in &self.entries {
            counts[i + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; self.entries.len()];
        let mut vals = vec![0.0; self.entries.len()];
        let mut next = counts.clone();
        for &(i, j, v) in &self.entries {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        indptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..self.nrows {
            row.clear();
            row.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut s = 0.0;
                while k < row.len() && row[k].0 == j {
                    s += row[k].1;
                    k += 1;
                }
                indices.push(j);
                values.push(s);
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, indptr, indices, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self { nrows: n, ncols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matrix-vector dimension mismatch");
        (0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nrows);
        (0..self.nrows).map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>()).sum()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = Triplets::new(self.ncols, self.nrows);
        t.add_csr_transposed(self, 0, 0, 1.0);
        t.to_csr()
    }

    pub fn scaled(&self, s: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &CsrMatrix, s: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = Triplets::new(self.nrows, self.ncols);
        t.add_csr(self, 0, 0, 1.0);
        t.add_csr(other, 0, 0, s);
        t.to_csr()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest entry of `|A - Aᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        self.add_scaled(&self.transpose(), -1.0).max_abs()
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.asymmetry() <= rel_tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Submatrix with the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut t = Triplets::new(rows.len(), cols.len());
        for (a, &r) in rows.iter().enumerate() {
            for (j, v) in self.row(r) {
                if col_map[j] != usize::MAX {
                    t.push(a, col_map[j], v);
                }
            }
        }
        t.to_csr()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    /// Iterate over stored `(row, col, value)` entries.
    pub fn triplet_iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
