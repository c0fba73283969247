use ndarray::Array1;
use ndarray_linalg::SVD;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, trace};
use crate::superop::{devectorize, DensityMatrix, SuperOperator, Tolerances};

/// Relative size below which the second-smallest singular value counts as a
/// second null direction.
const GAP: f64 = 1e-8;

/// Unique null vector of a generator, as a density matrix.
pub fn steady_state(s: &SuperOperator) -> Result<DensityMatrix> {
    let n = s.matrix().nrows();
    let (_, sigma, vt) = s.matrix().svd(false, true)?;
    let vt = vt.expect("right singular vectors requested");
    let norm = sigma[0];
    if n > 1 && sigma[n - 2] < GAP * norm {
        return Err(Error::NonUniqueSteadyState {
            second: sigma[n - 2],
            norm,
        });
    }
    // rows of Vᴴ are conjugated right singular vectors
    let null: Array1<C64> = vt.row(n - 1).mapv(|z| z.conj());
    let x = hermitian_part(&devectorize(&null, s.hilbert_dim())?);
    let tr = trace(&x).re;
    if tr.abs() < 1e-12 {
        return Err(Error::TraceNormalization { trace: tr });
    }
    DensityMatrix::with_tolerances(x.mapv(|z| z / tr), Tolerances::STRICT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matrix_unit, max_abs, real_diag};
    use crate::liouvillian::{assemble_static, LindbladTerm};
    use crate::models::{fock_annihilation, thermal_state};
    use crate::superop::{expectation, vectorize, CMatrix};

    #[test]
    fn decay_goes_to_ground() {
        let l = assemble_static(&CMatrix::zeros((2, 2)), &[LindbladTerm::new(matrix_unit(2, 0, 1), 1.0).unwrap()]).unwrap();
        let ss = steady_state(&l).unwrap();
        assert!(max_abs(&(ss.matrix() - &matrix_unit(2, 0, 0))) < 1e-12);
    }

    #[test]
    fn thermal_detailed_balance() {
        let n = 20;
        let nbar = 0.5;
        let b = fock_annihilation(n).unwrap();
        let bd = crate::linalg::dagger(&b);
        let l = assemble_static(
            &CMatrix::zeros((n, n)),
            &[LindbladTerm::new(b.clone(), nbar + 1.0).unwrap(), LindbladTerm::new(bd.clone(), nbar).unwrap()],
        )
        .unwrap();
        let ss = steady_state(&l).unwrap();
        let occ = expectation(&bd.dot(&b), &ss).unwrap().re;
        assert!((occ - nbar).abs() < 1e-6);
        // truncated detailed balance is exact on the cutoff space
        assert!(max_abs(&(ss.matrix() - thermal_state(n, nbar).unwrap().matrix())) < 1e-10);
        let residual = l.apply_vec(&vectorize(ss.matrix()).unwrap());
        assert!(residual.iter().all(|z| z.norm() < 1e-9));
    }

    #[test]
    fn unitary_generator_is_degenerate() {
        let l = assemble_static(&real_diag(&[0.0, 1.0]), &[]).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::NonUniqueSteadyState { .. })));
    }

    #[test]
    fn traceless_null_vector_is_rejected() {
        // null space spanned by |0><1|: a generator killing only that coherence
        let mut m = crate::linalg::identity(4).mapv(|z| -z);
        m[[2, 2]] = C64::new(0.0, 0.0);
        let s = SuperOperator::from_matrix(m, 2).unwrap();
        assert!(matches!(steady_state(&s), Err(Error::TraceNormalization { .. })));
    }
}
