//! Compressed-row view of a dense superoperator.
//!
//! Liouvillians built from local operators are overwhelmingly zero. Storage
//! stays dense everywhere else; this view only exists so that repeated
//! matrix-vector products (time stepping) and products with the projector
//! skip the zeros.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::exec::Execution;
use crate::linalg::ZERO;
use crate::superop::{CMatrix, SuperOperator};

/// Below this many rows a parallel mat-vec costs more than it saves.
const PARALLEL_ROWS: usize = 1024;

#[derive(Debug, Clone)]
pub struct CompiledSuperOp {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl CompiledSuperOp {
    pub fn from_dense(mat: &CMatrix) -> Self {
        let dim = mat.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in mat.rows() {
            for (j, &z) in row.iter().enumerate() {
                if z != ZERO {
                    cols.push(j);
                    vals.push(z);
                }
            }
            row_ptr.push(cols.len());
        }
        CompiledSuperOp {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_superop(s: &SuperOperator) -> Self {
        Self::from_dense(s.matrix())
    }

    pub fn identity(dim: usize) -> Self {
        CompiledSuperOp {
            dim,
            row_ptr: (0..=dim).collect(),
            cols: (0..dim).collect(),
            vals: vec![C64::new(1.0, 0.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Builds a matrix row by row: `row(r, acc, touched)` accumulates into
    /// a dense scratch row and records the columns it wrote.
    fn build_rows<F>(dim: usize, mut row: F) -> Self
    where
        F: FnMut(usize, &mut [C64], &mut Vec<usize>),
    {
        let mut acc = vec![ZERO; dim];
        let mut seen = vec![false; dim];
        let mut touched = Vec::new();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in 0..dim {
            touched.clear();
            row(r, &mut acc, &mut touched);
            touched.retain(|&c| !std::mem::replace(&mut seen[c], true));
            touched.sort_unstable();
            for &c in &touched {
                cols.push(c);
                vals.push(acc[c]);
                acc[c] = ZERO;
                seen[c] = false;
            }
            row_ptr.push(cols.len());
        }
        CompiledSuperOp {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    /// `self · rhs`.
    pub fn compose(&self, rhs: &CompiledSuperOp) -> CompiledSuperOp {
        assert_eq!(self.dim, rhs.dim, "sparse dimensions differ");
        Self::build_rows(self.dim, |r, acc, touched| {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (mid, v) = (self.cols[k], self.vals[k]);
                for k2 in rhs.row_ptr[mid]..rhs.row_ptr[mid + 1] {
                    let c = rhs.cols[k2];
                    acc[c] += v * rhs.vals[k2];
                    touched.push(c);
                }
            }
        })
    }

    /// `alpha · self + beta · other`.
    pub fn combine(&self, alpha: C64, other: &CompiledSuperOp, beta: C64) -> CompiledSuperOp {
        assert_eq!(self.dim, other.dim, "sparse dimensions differ");
        Self::build_rows(self.dim, |r, acc, touched| {
            for (m, f) in [(self, alpha), (other, beta)] {
                for k in m.row_ptr[r]..m.row_ptr[r + 1] {
                    acc[m.cols[k]] += f * m.vals[k];
                    touched.push(m.cols[k]);
                }
            }
        })
    }

    /// `max |self − other|` entrywise.
    pub fn max_abs_diff(&self, other: &CompiledSuperOp) -> f64 {
        self.combine(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0)).max_abs()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    fn row_dot(&self, r: usize, x: &[C64]) -> C64 {
        let mut acc = ZERO;
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc += self.vals[k] * x[self.cols[k]];
        }
        acc
    }

    /// `out += scale · (self · x)`.
    pub fn mul_add(&self, x: &[C64], scale: C64, out: &mut [C64], exec: Execution) {
        let exec = if self.dim >= PARALLEL_ROWS { exec } else { Execution::Sequential };
        match exec {
            Execution::Sequential => {
                for (r, slot) in out.iter_mut().enumerate() {
                    *slot += scale * self.row_dot(r, x);
                }
            }
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                out.par_iter_mut()
                    .enumerate()
                    .for_each(|(r, slot)| *slot += scale * self.row_dot(r, x));
            }
        }
    }

    pub fn apply(&self, x: &Array1<C64>) -> Array1<C64> {
        let mut out = Array1::zeros(self.dim);
        self.mul_add(
            x.as_slice().expect("contiguous vector"),
            C64::new(1.0, 0.0),
            out.as_slice_mut().expect("contiguous vector"),
            Execution::default(),
        );
        out
    }

    /// `dense · self`.
    pub fn left_mul_dense(&self, dense: &CMatrix) -> CMatrix {
        let mut out = Array2::zeros((dense.nrows(), self.dim));
        for (src, mut dst) in dense.rows().into_iter().zip(out.rows_mut()) {
            for r in 0..self.dim {
                let x = src[r];
                if x == ZERO {
                    continue;
                }
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    dst[self.cols[k]] += x * self.vals[k];
                }
            }
        }
        out
    }

    /// `self · dense`.
    pub fn right_mul_dense(&self, dense: &CMatrix) -> CMatrix {
        let mut out = Array2::zeros((self.dim, dense.ncols()));
        for r in 0..self.dim {
            let mut dst = out.row_mut(r);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (c, v) = (self.cols[k], self.vals[k]);
                dst.zip_mut_with(&dense.row(c), |o, &s| *o += v * s);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, random_complex};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn products_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut a = random_complex(&mut rng, 9, 9);
        a.mapv_inplace(|z| if z.re > 0.3 { z } else { ZERO });
        let b = random_complex(&mut rng, 9, 9);
        let x: Array1<C64> = random_complex(&mut rng, 9, 1).column(0).to_owned();
        let s = CompiledSuperOp::from_dense(&a);
        assert!(s.nnz() < 81);
        assert!(max_abs(&(s.left_mul_dense(&b) - b.dot(&a))) < 1e-12);
        assert!(max_abs(&(s.right_mul_dense(&b) - a.dot(&b))) < 1e-12);
        let diff = s.apply(&x) - a.dot(&x);
        assert!(diff.iter().all(|z| z.norm() < 1e-12));

        let t = CompiledSuperOp::from_dense(&b);
        let dense_of = |m: &CompiledSuperOp| m.right_mul_dense(&crate::linalg::identity(9));
        assert!(max_abs(&(dense_of(&s.compose(&t)) - a.dot(&b))) < 1e-12);
        let half = C64::new(0.5, 0.0);
        assert!(max_abs(&(dense_of(&s.combine(half, &t, -half)) - (&a - &b).mapv(|z| z * 0.5))) < 1e-12);
        assert!((s.max_abs_diff(&t) - max_abs(&(&a - &b))).abs() < 1e-15);
        assert_eq!(dense_of(&CompiledSuperOp::identity(9)), crate::linalg::identity(9));
    }
}
