//! Dense matrices, density matrices and superoperators on column-stacked
//! vectorized operators.

use std::ops::{Add, AddAssign, Mul, Sub};

use ndarray::{Array1, Array2, ShapeBuilder};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, I, ONE};

/// Dense complex matrix; every operator in the crate is one of these.
pub type CMatrix = Array2<C64>;

/// Validation thresholds for [`DensityMatrix`]. They report violations and
/// never repair the matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub trace: f64,
    /// Smallest admissible eigenvalue (a small negative number).
    pub positivity: f64,
}

impl Tolerances {
    pub const STRICT: Tolerances = Tolerances {
        hermitian: 1e-10,
        trace: 1e-10,
        positivity: -1e-8,
    };
    /// Widened positivity floor for integrated trajectories.
    pub const TRAJECTORY: Tolerances = Tolerances {
        hermitian: 1e-10,
        trace: 1e-10,
        positivity: -1e-6,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::STRICT
    }
}

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        Self::with_tolerances(mat, Tolerances::STRICT)
    }

    pub fn with_tolerances(mat: CMatrix, tol: Tolerances) -> Result<Self> {
        check_density(&mat, tol)?;
        Ok(DensityMatrix { mat })
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::DimensionMismatch {
                context: "basis state",
                expected: dim,
                found: k,
            });
        }
        Ok(DensityMatrix {
            mat: linalg::matrix_unit(dim, k, k),
        })
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            mat: linalg::identity(dim).mapv(|z| z / dim as f64),
        }
    }

    /// Pure state from (unnormalized) amplitudes.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm2 == 0.0 || !norm2.is_finite() {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let n = amplitudes.len();
        let mat = Array2::from_shape_fn((n, n), |(i, j)| {
            amplitudes[i] * amplitudes[j].conj() / norm2
        });
        DensityMatrix::new(mat)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn vectorize(&self) -> Array1<C64> {
        vectorize(&self.mat).expect("density matrices are square")
    }

    /// `ρ ⊗ σ` with `self` as the first factor.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            mat: kron(&self.mat, &other.mat),
        }
    }

    pub fn population(&self, k: usize) -> f64 {
        self.mat[[k, k]].re
    }
}

fn check_density(mat: &CMatrix, tol: Tolerances) -> Result<()> {
    let n = linalg::require_square(mat, "density matrix")?;
    if n == 0 {
        return Err(Error::InvalidDensityMatrix("empty matrix".into()));
    }
    if !linalg::all_finite(mat) {
        return Err(Error::InvalidDensityMatrix("non-finite entry".into()));
    }
    let herm = linalg::hermiticity_residual(mat);
    if herm > tol.hermitian {
        return Err(Error::InvalidDensityMatrix(format!(
            "Hermiticity residual {herm:e} exceeds {:e}",
            tol.hermitian
        )));
    }
    let tr = linalg::trace(mat);
    if (tr - ONE).norm() > tol.trace {
        return Err(Error::InvalidDensityMatrix(format!(
            "trace {tr} differs from 1 by more than {:e}",
            tol.trace
        )));
    }
    let min_eig = linalg::eigvalsh(mat)?[0];
    if min_eig < tol.positivity {
        return Err(Error::InvalidDensityMatrix(format!(
            "minimum eigenvalue {min_eig:e} below {:e}",
            tol.positivity
        )));
    }
    Ok(())
}

/// Ordered tensor factorization of a Hilbert space, system factor first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpace {
    dims: Vec<usize>,
}

impl TensorSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "tensor factor dimensions must be >= 1, got {dims:?}"
            )));
        }
        Ok(TensorSpace { dims })
    }

    /// System ⊗ bath.
    pub fn bipartite(system: usize, bath: usize) -> Result<Self> {
        Self::new(vec![system, bath])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn factor(&self, index: usize) -> Result<usize> {
        self.dims.get(index).copied().ok_or(Error::InvalidFactor {
            index,
            count: self.dims.len(),
        })
    }

    pub fn system_dim(&self) -> usize {
        self.dims[0]
    }

    /// Product of every factor after the first.
    pub fn bath_dim(&self) -> usize {
        self.dims[1..].iter().product()
    }
}

/// Superoperator acting on column-stacked `d × d` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    mat: CMatrix,
    hilbert_dim: usize,
}

impl SuperOperator {
    pub fn from_matrix(mat: CMatrix, hilbert_dim: usize) -> Result<Self> {
        let n = hilbert_dim * hilbert_dim;
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "superoperator",
                expected: n,
                found: mat.nrows().max(mat.ncols()),
            });
        }
        Ok(SuperOperator { mat, hilbert_dim })
    }

    pub(crate) fn add_dissipator(&mut self, a: &CMatrix, rate: f64) {
        add_dissipator(&mut self.mat, a, rate);
    }

    pub fn zeros(hilbert_dim: usize) -> Self {
        let n = hilbert_dim * hilbert_dim;
        SuperOperator {
            mat: Array2::zeros((n, n)),
            hilbert_dim,
        }
    }

    pub fn identity(hilbert_dim: usize) -> Self {
        SuperOperator {
            mat: linalg::identity(hilbert_dim * hilbert_dim),
            hilbert_dim,
        }
    }

    /// `X ↦ A X`.
    pub fn left(a: &CMatrix) -> Self {
        let d = a.nrows();
        SuperOperator {
            mat: kron(&linalg::identity(d), a),
            hilbert_dim: d,
        }
    }

    /// `X ↦ X B`.
    pub fn right(b: &CMatrix) -> Self {
        let d = b.nrows();
        SuperOperator {
            mat: kron(&b.t().to_owned(), &linalg::identity(d)),
            hilbert_dim: d,
        }
    }

    /// `X ↦ A X B`.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Self {
        SuperOperator {
            mat: kron(&b.t().to_owned(), a),
            hilbert_dim: a.nrows(),
        }
    }

    /// Builds a superoperator column by column from its action on the
    /// matrix units `|i⟩⟨j|`.
    pub fn from_action<F>(hilbert_dim: usize, action: F) -> Self
    where
        F: Fn(&CMatrix) -> CMatrix,
    {
        let d = hilbert_dim;
        let mut mat = Array2::zeros((d * d, d * d));
        for j in 0..d {
            for i in 0..d {
                let out = action(&linalg::matrix_unit(d, i, j));
                let col = vectorize(&out).expect("action must return a square matrix");
                mat.column_mut(i + j * d).assign(&col);
            }
        }
        SuperOperator { mat, hilbert_dim }
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let v = vectorize(x)?;
        if x.nrows() != self.hilbert_dim {
            return Err(Error::DimensionMismatch {
                context: "superoperator application",
                expected: self.hilbert_dim,
                found: x.nrows(),
            });
        }
        devectorize(&self.mat.dot(&v), self.hilbert_dim)
    }

    pub fn apply_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        self.mat.dot(v)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SuperOperator) -> SuperOperator {
        assert_eq!(self.hilbert_dim, other.hilbert_dim, "superoperator dimension mismatch");
        SuperOperator {
            mat: self.mat.dot(&other.mat),
            hilbert_dim: self.hilbert_dim,
        }
    }

    pub fn scale(&self, z: C64) -> SuperOperator {
        SuperOperator {
            mat: self.mat.mapv(|w| w * z),
            hilbert_dim: self.hilbert_dim,
        }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.mat)
    }

    /// Restriction to the block spanned by the given basis indices: embeds a
    /// block matrix, applies `self`, and reads back the same block.
    pub fn restrict(&self, indices: &[usize]) -> SuperOperator {
        let d = self.hilbert_dim;
        let k = indices.len();
        SuperOperator::from_action(k, |x| {
            let mut big = Array2::zeros((d, d));
            for (a, &ia) in indices.iter().enumerate() {
                for (b, &ib) in indices.iter().enumerate() {
                    big[[ia, ib]] = x[[a, b]];
                }
            }
            let out = self.apply(&big).expect("dimensions are consistent");
            Array2::from_shape_fn((k, k), |(a, b)| out[[indices[a], indices[b]]])
        })
    }
}

impl AddAssign<&SuperOperator> for SuperOperator {
    fn add_assign(&mut self, rhs: &SuperOperator) {
        assert_eq!(self.hilbert_dim, rhs.hilbert_dim, "superoperator dimensions differ");
        self.mat += &rhs.mat;
    }
}

impl Add for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: &SuperOperator) -> SuperOperator {
        assert_eq!(self.hilbert_dim, rhs.hilbert_dim, "superoperator dimension mismatch");
        SuperOperator {
            mat: &self.mat + &rhs.mat,
            hilbert_dim: self.hilbert_dim,
        }
    }
}

impl Sub for &SuperOperator {
    type Output = SuperOperator;
    fn sub(self, rhs: &SuperOperator) -> SuperOperator {
        assert_eq!(self.hilbert_dim, rhs.hilbert_dim, "superoperator dimension mismatch");
        SuperOperator {
            mat: &self.mat - &rhs.mat,
            hilbert_dim: self.hilbert_dim,
        }
    }
}

impl Mul for &SuperOperator {
    type Output = SuperOperator;
    fn mul(self, rhs: &SuperOperator) -> SuperOperator {
        self.compose(rhs)
    }
}

/// Kronecker product; `(m·p) × (n·q)`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = Array2::zeros((a.nrows() * b.nrows(), a.ncols() * b.ncols()));
    kron_acc(&mut out, linalg::ONE, a, b);
    out
}

/// `out += c · (a ⊗ b)`, skipping zero entries of `a`.
fn kron_acc(out: &mut CMatrix, c: C64, a: &CMatrix, b: &CMatrix) {
    let (p, q) = b.dim();
    for ((i, j), &aij) in a.indexed_iter() {
        if aij == linalg::ZERO {
            continue;
        }
        let f = c * aij;
        let mut block = out.slice_mut(ndarray::s![i * p..(i + 1) * p, j * q..(j + 1) * q]);
        block.zip_mut_with(b, |o, &x| *o += f * x);
    }
}

/// Column-stacking: entry `(i, j)` goes to index `i + j·d`.
pub fn vectorize(m: &CMatrix) -> Result<Array1<C64>> {
    linalg::require_square(m, "vectorize")?;
    Ok(m.t().iter().cloned().collect())
}

/// Exact inverse of [`vectorize`].
pub fn devectorize(v: &Array1<C64>, d: usize) -> Result<CMatrix> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch {
            context: "devectorize",
            expected: d * d,
            found: v.len(),
        });
    }
    let fortran = Array2::from_shape_vec((d, d).f(), v.to_vec())
        .map_err(|e| Error::LinAlg(e.to_string()))?;
    Ok(fortran.as_standard_layout().into_owned())
}

/// Superoperator of `−i[h, ·]` for Hermitian `h`.
pub fn commutator_superop(h: &CMatrix) -> Result<SuperOperator> {
    linalg::require_square(h, "commutator_superop")?;
    let residual = linalg::hermiticity_residual(h);
    if residual > 1e-10 {
        return Err(Error::NotHermitian { residual });
    }
    Ok(commutator_general(h))
}

/// `−i[a, ·]` without the Hermiticity check; used for the individual
/// (non-Hermitian) pieces of an interaction.
pub fn commutator_general(a: &CMatrix) -> SuperOperator {
    let d = a.nrows();
    let mut mat = Array2::zeros((d * d, d * d));
    add_commutator(&mut mat, a);
    SuperOperator { mat, hilbert_dim: d }
}

/// `out += −i[a, ·]`.
pub(crate) fn add_commutator(out: &mut CMatrix, a: &CMatrix) {
    let id = linalg::identity(a.nrows());
    kron_acc(out, -I, &id, a);
    kron_acc(out, I, &a.t().to_owned(), &id);
}

/// `out += rate · D[a]`; the rate is not checked.
pub(crate) fn add_dissipator(out: &mut CMatrix, a: &CMatrix, rate: f64) {
    let id = linalg::identity(a.nrows());
    let ada = linalg::dagger(a).dot(a);
    let half = C64::new(-0.5 * rate, 0.0);
    kron_acc(out, C64::new(rate, 0.0), &a.mapv(|z| z.conj()), a);
    kron_acc(out, half, &id, &ada);
    kron_acc(out, half, &ada.t().to_owned(), &id);
}

/// `rate · (A ρ A† − ½{A†A, ρ})`.
pub fn dissipator_superop(a: &CMatrix, rate: f64) -> Result<SuperOperator> {
    linalg::require_square(a, "dissipator_superop")?;
    if rate < 0.0 || !rate.is_finite() {
        return Err(Error::NegativeRate(rate));
    }
    let d = a.nrows();
    let mut mat = Array2::zeros((d * d, d * d));
    add_dissipator(&mut mat, a, rate);
    Ok(SuperOperator { mat, hilbert_dim: d })
}

/// Partial trace of an arbitrary operator, keeping one tensor factor.
pub fn partial_trace_matrix(m: &CMatrix, space: &TensorSpace, keep: usize) -> Result<CMatrix> {
    let total = space.total_dim();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch {
            context: "partial_trace",
            expected: total,
            found: m.nrows(),
        });
    }
    let dk = space.factor(keep)?;
    let dims = space.dims();
    // stride of the kept factor and the size of the blocks before/after it
    let inner: usize = dims[keep + 1..].iter().product();
    let outer: usize = dims[..keep].iter().product();
    let mut out = Array2::zeros((dk, dk));
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = linalg::ZERO;
            for o in 0..outer {
                for r in 0..inner {
                    let row = (o * dk + a) * inner + r;
                    let col = (o * dk + b) * inner + r;
                    acc += m[[row, col]];
                }
            }
            out[[a, b]] = acc;
        }
    }
    Ok(out)
}

pub fn partial_trace(rho: &DensityMatrix, space: &TensorSpace, keep: usize) -> Result<DensityMatrix> {
    let m = partial_trace_matrix(rho.matrix(), space, keep)?;
    DensityMatrix::with_tolerances(m, Tolerances::TRAJECTORY)
}

/// `Tr(o ρ)`.
pub fn expectation(o: &CMatrix, rho: &DensityMatrix) -> Result<C64> {
    expectation_matrix(o, rho.matrix())
}

pub fn expectation_matrix(o: &CMatrix, rho: &CMatrix) -> Result<C64> {
    let d = rho.nrows();
    if o.nrows() != d || o.ncols() != d {
        return Err(Error::DimensionMismatch {
            context: "expectation",
            expected: d,
            found: o.nrows(),
        });
    }
    let mut acc = linalg::ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += o[[i, j]] * rho[[j, i]];
        }
    }
    Ok(acc)
}

/// `½ Σ |λ_k(a − b)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    trace_distance_matrix(a.matrix(), b.matrix())
}

pub fn trace_distance_matrix(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "trace_distance",
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let eig = linalg::eigvalsh(&(a - b))?;
    Ok(0.5 * eig.iter().map(|x| x.abs()).sum::<f64>())
}
