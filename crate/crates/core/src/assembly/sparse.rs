use std::io::Write;

use crate::error::{Error, Result};
use crate::pointcloud::io::fmt_full;
use crate::scalar::Real;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds from per-row `(column, value)` lists. Columns are sorted and
    /// duplicates summed.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, T)>>) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        let n_rows = rows.len();
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|e| e.0);
            let start = col_idx.len();
            for (j, v) in row {
                if j >= n_cols {
                    return Err(Error::Dimension(format!(
                        "row {i} references column {j} of {n_cols}"
                    )));
                }
                if col_idx.len() > start && col_idx.last() == Some(&j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Row-major dense input, zeros dropped.
    pub fn from_dense(a: &[T], n_rows: usize, n_cols: usize) -> Self {
        assert_eq!(a.len(), n_rows * n_cols);
        let rows = (0..n_rows)
            .map(|i| {
                (0..n_cols)
                    .filter(|&j| a[i * n_cols + j] != T::zero())
                    .map(|j| (j, a[i * n_cols + j]))
                    .collect()
            })
            .collect();
        Self::from_rows(n_cols, rows).expect("columns in range")
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(T::zero(), |k| vals[k])
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.n_cols);
        for (i, yi) in y.iter_mut().enumerate().take(self.n_rows) {
            let mut s = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    /// `b - A x` with error-free product and sum transformations, accurate
    /// to about twice the working precision.
    pub fn residual_compensated(&self, x: &[T], b: &[T]) -> Vec<T> {
        (0..self.n_rows)
            .map(|i| {
                let (mut s, mut c) = (b[i], T::zero());
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    let (a, v) = (-self.values[k], x[self.col_idx[k]]);
                    let p = a * v;
                    let pe = a.mul_add(v, -p);
                    let t = s + p;
                    let z = t - s;
                    c += (s - (t - z)) + (p - z) + pe;
                    s = t;
                }
                s + c
            })
            .collect()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut a = vec![T::zero(); self.n_rows * self.n_cols];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                a[i * self.n_cols + j] = v;
            }
        }
        a
    }

    /// One `i j value` line per stored entry, 0-based.
    pub fn write_coo<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                writeln!(out, "{i} {j} {}", fmt_full(v))?;
            }
        }
        Ok(())
    }
}
