//! Minimal dense and compressed-row matrices with the two products the
//! oracles need, plus a power iteration for the largest singular value.

use crate::linalg::{norm2, scale};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| crate::linalg::dot(self.row(i), x)).collect()
    }

    pub fn mul_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, yi) in y.iter().enumerate() {
            if *yi != 0.0 {
                crate::linalg::axpy(*yi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn column_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sq.iter_mut().zip(self.row(i)) {
                *s += v * v;
            }
        }
        sq.into_iter().map(f64::sqrt).collect()
    }
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                let r = self.indptr[i]..self.indptr[i + 1];
                self.indices[r.clone()].iter().zip(&self.values[r]).map(|(j, v)| v * x[*j]).sum()
            })
            .collect()
    }

    pub fn mul_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, yi) in y.iter().enumerate() {
            let r = self.indptr[i]..self.indptr[i + 1];
            for (j, v) in self.indices[r.clone()].iter().zip(&self.values[r]) {
                out[*j] += v * yi;
            }
        }
        out
    }
}

/// Largest singular value by power iteration on `AᵀA`, started from the
/// normalized all-ones vector. Stops when successive estimates agree to
/// `rel_tol` or after `max_iter` products.
pub fn largest_singular_value(
    cols: usize,
    mul: impl Fn(&[f64]) -> Vec<f64>,
    mul_t: impl Fn(&[f64]) -> Vec<f64>,
    rel_tol: f64,
    max_iter: usize,
) -> f64 {
    let mut x = vec![1.0 / (cols as f64).sqrt(); cols];
    let mut sigma = 0.0;
    for _ in 0..max_iter {
        let w = mul_t(&mul(&x));
        let nw = norm2(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw.sqrt();
        x = scale(&w, 1.0 / nw);
        let done = (next - sigma).abs() <= rel_tol * next;
        sigma = next;
        if done {
            break;
        }
    }
    sigma
}
