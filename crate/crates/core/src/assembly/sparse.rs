//! Lower-triangular compressed-column storage of a symmetric matrix.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricCsc {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricCsc {
    /// Zero matrix with the given lower pattern; `rows[j]` lists the rows
    /// `i >= j` of column `j` (any order, duplicates allowed).
    pub fn from_pattern(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::invalid("pattern column count differs from dimension"));
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for (j, mut col) in rows.into_iter().enumerate() {
            col.sort_unstable();
            col.dedup();
            if col.first().is_some_and(|&i| i < j) || col.last().is_some_and(|&i| i >= n) {
                return Err(Error::invalid(format!("column {j} has entries outside the lower triangle")));
            }
            row_idx.extend(col);
            col_ptr.push(row_idx.len());
        }
        let values = vec![0.0; row_idx.len()];
        Ok(SymmetricCsc { n, col_ptr, row_idx, values })
    }

    /// Builds from a dense symmetric matrix given row-major, keeping nonzeros
    /// and the full diagonal.
    pub fn from_dense(n: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != n * n {
            return Err(Error::invalid("dense matrix has the wrong size"));
        }
        let rows = (0..n).map(|j| (j..n).filter(|&i| i == j || dense[i * n + j] != 0.0).collect()).collect();
        let mut m = Self::from_pattern(n, rows)?;
        for j in 0..n {
            for p in m.col_ptr[j]..m.col_ptr[j + 1] {
                m.values[p] = dense[m.row_idx[p] * n + j];
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Storage slot of entry `(i, j)` or `(j, i)`.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()].binary_search(&i).ok().map(|k| range.start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.values[p])
    }

    /// Adds `v` to entry `(i, j)` (and implicitly `(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        let p = self
            .position(i, j)
            .ok_or_else(|| Error::invalid(format!("entry ({i}, {j}) is not in the sparsity pattern")))?;
        self.values[p] += v;
        Ok(())
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n {
            let xj = x[j];
            let mut acc = 0.0;
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                let v = self.values[p];
                y[i] += v * xj;
                if i != j {
                    acc += v * x[i];
                }
            }
            y[j] += acc;
        }
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// Row-major dense copy, for tests and small diagnostics.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for j in 0..n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                d[i * n + j] = self.values[p];
                d[j * n + i] = self.values[p];
            }
        }
        d
    }
}
