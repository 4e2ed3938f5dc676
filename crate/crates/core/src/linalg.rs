//! Small dense row-major matrices. Dimensions here are tens, not thousands.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Matrix { rows: n, cols: n, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let cols = rows.first()?.len();
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        let data = rows.iter().flatten().copied().collect();
        Some(Matrix { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| self.get(r, c) == if r == c { 1.0 } else { 0.0 })
            })
    }

    /// `out = self * v`
    pub fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row(r).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(v, &mut out);
        out
    }

    /// Scales column `c` by `factors[c]`, i.e. returns `self * diag(factors)`.
    pub fn scale_columns(&self, factors: &[f64]) -> Matrix {
        let mut m = self.clone();
        for r in 0..m.rows {
            for c in 0..m.cols {
                m.data[r * m.cols + c] *= factors[c];
            }
        }
        m
    }

    /// Largest entry of `|MᵀM − I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.cols;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..self.rows).map(|k| self.get(k, i) * self.get(k, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Haar-like random orthogonal matrix: Gaussian entries orthonormalised by
/// modified Gram-Schmidt with one re-orthogonalisation pass.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    loop {
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        if orthonormalize(&mut rows) {
            return Matrix::from_rows(&rows).expect("square");
        }
    }
}

/// Orthonormalises the rows in place. Returns false on (numerical) rank loss.
pub fn orthonormalize(rows: &mut [Vec<f64>]) -> bool {
    for i in 0..rows.len() {
        for _pass in 0..2 {
            for j in 0..i {
                let (done, rest) = rows.split_at_mut(i);
                let q = &done[j];
                let v = &mut rest[0];
                let proj: f64 = q.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                for (vk, qk) in v.iter_mut().zip(q) {
                    *vk -= proj * qk;
                }
            }
        }
        let norm = rows[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 1e-8) {
            return false;
        }
        for x in rows[i].iter_mut() {
            *x /= norm;
        }
    }
    true
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
