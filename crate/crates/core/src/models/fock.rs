use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{dagger, real_diag};
use crate::superop::{CMatrix, DensityMatrix, Tolerances};

/// Truncated lowering operator, `⟨k−1|a|k⟩ = √k`.
pub fn fock_annihilation(n: usize) -> Result<CMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("Fock cutoff must be at least 2, got {n}")));
    }
    let mut a = CMatrix::zeros((n, n));
    for k in 1..n {
        a[[k - 1, k]] = C64::new((k as f64).sqrt(), 0.0);
    }
    Ok(a)
}

pub fn number_operator(n: usize) -> Result<CMatrix> {
    let a = fock_annihilation(n)?;
    Ok(dagger(&a).dot(&a))
}

/// Truncated, renormalized thermal state with populations `∝ (n̄/(n̄+1))^k`.
pub fn thermal_state(n: usize, nbar: f64) -> Result<DensityMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("Fock cutoff must be at least 2, got {n}")));
    }
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidParameter(format!("thermal occupation must be nonnegative, got {nbar}")));
    }
    let x = nbar / (nbar + 1.0);
    let weights: Vec<f64> = (0..n).map(|k| x.powi(k as i32)).collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    DensityMatrix::with_tolerances(real_diag(&probs), Tolerances::STRICT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, matrix_unit, max_abs};
    use crate::superop::expectation;

    #[test]
    fn lowering_examples() {
        let a = fock_annihilation(2).unwrap();
        assert_eq!(a, matrix_unit(2, 0, 1));
        let n = number_operator(5).unwrap();
        assert!(max_abs(&(n - real_diag(&[0.0, 1.0, 2.0, 3.0, 4.0]))) < 1e-14);
        let a = fock_annihilation(6).unwrap();
        let comm = a.dot(&dagger(&a)) - dagger(&a).dot(&a);
        let expected = identity(6) - matrix_unit(6, 5, 5).mapv(|z| z * 6.0);
        assert!(max_abs(&(comm - expected)) < 1e-13);
        assert!(fock_annihilation(1).is_err());
    }

    #[test]
    fn thermal_examples() {
        let vac = thermal_state(5, 0.0).unwrap();
        assert_eq!(vac.matrix(), &matrix_unit(5, 0, 0));
        let th = thermal_state(30, 0.5).unwrap();
        let tr: f64 = (0..30).map(|k| th.population(k)).sum();
        assert!((tr - 1.0).abs() < 1e-15);
        let occ = expectation(&number_operator(30).unwrap(), &th).unwrap();
        assert!((occ.re - 0.5).abs() < 1e-6);
        assert!(thermal_state(4, -0.1).is_err());
    }
}
