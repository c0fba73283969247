//! Small dense helpers shared by the superoperator modules.

use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::{EigValsh, Eigh, SVD, UPLO};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn identity(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// `|i⟩⟨j|` in dimension `n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> Array2<C64> {
    let mut m = Array2::zeros((n, n));
    m[[i, j]] = ONE;
    m
}

pub fn diag(entries: &[C64]) -> Array2<C64> {
    let n = entries.len();
    let mut m = Array2::zeros((n, n));
    for (k, &z) in entries.iter().enumerate() {
        m[[k, k]] = z;
    }
    m
}

pub fn real_diag(entries: &[f64]) -> Array2<C64> {
    diag(&entries.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
}

/// Largest entry modulus.
pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &Array1<C64>) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn is_square(m: &Array2<C64>) -> bool {
    m.nrows() == m.ncols()
}

pub fn require_square(m: &Array2<C64>, context: &'static str) -> Result<usize> {
    if !is_square(m) {
        return Err(Error::DimensionMismatch {
            context,
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn hermiticity_residual(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            r = r.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    r
}

pub fn hermitian_part(m: &Array2<C64>) -> Array2<C64> {
    (m + &dagger(m)).mapv(|z| z * 0.5)
}

pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().iter().sum()
}

pub fn all_finite(m: &Array2<C64>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn eigvalsh(m: &Array2<C64>) -> Result<Array1<f64>> {
    Ok(hermitian_part(m).eigvalsh(UPLO::Lower)?)
}

/// Eigen-decomposition of the Hermitian part of `m`: ascending eigenvalues
/// and orthonormal eigenvectors as columns. The input is copied into
/// column-major order first; the LAPACK wrapper returns conjugated
/// eigenvectors for row-major complex input.
pub fn eigh(m: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let mut f = Array2::zeros(m.raw_dim().f());
    f.assign(&hermitian_part(m));
    Ok(f.eigh(UPLO::Lower)?)
}

/// Singular values, descending.
pub fn singular_values(m: &Array2<C64>) -> Result<Array1<f64>> {
    let (_, s, _) = m.svd(false, false)?;
    Ok(s)
}

/// 2-norm condition number; infinite for an exactly singular matrix.
pub fn condition_number(m: &Array2<C64>) -> Result<f64> {
    let s = singular_values(m)?;
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_one(m: &Array2<C64>) -> f64 {
    m.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Random Hermitian matrix: Gaussian entries, symmetrized, rescaled so its
/// spectral norm equals `norm`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, norm: f64) -> Array2<C64> {
    let raw = random_complex(rng, n, n);
    let h = hermitian_part(&raw);
    let s = singular_values(&h).map(|s| s[0]).unwrap_or(0.0);
    if s == 0.0 {
        h
    } else {
        h.mapv(|z| z * (norm / s))
    }
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Array2<C64> {
    Array2::from_shape_simple_fn((rows, cols), || {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Random full-rank density matrix `G G† / Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Array2<C64> {
    let g = random_complex(rng, n, n);
    let rho = g.dot(&dagger(&g));
    let tr = trace(&rho).re;
    hermitian_part(&rho.mapv(|z| z / tr))
}

/// Random pure state `|ψ⟩⟨ψ|`.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Array2<C64> {
    let psi = random_complex(rng, n, 1);
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let rho = psi.dot(&dagger(&psi)).mapv(|z| z / norm2);
    hermitian_part(&rho)
}
