//! Far-detuned Λ system: two ground states coupled through an excited level.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::superop::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaParams {
    pub omega_a: C64,
    pub omega_b: C64,
    /// `δ_a − δ_b`
    pub delta: f64,
    /// `(δ_a + δ_b) / 2`
    pub bigdelta: f64,
}

impl LambdaParams {
    pub fn validate(&self) -> Result<()> {
        let values = [self.omega_a.re, self.omega_a.im, self.omega_b.re, self.omega_b.im, self.delta, self.bigdelta];
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("lambda parameters must be finite".into()));
        }
        if self.bigdelta == 0.0 {
            return Err(Error::InvalidParameter("bigdelta must be nonzero".into()));
        }
        Ok(())
    }

    /// `|Δ| / max(|δ|, |Ω_a|, |Ω_b|)`.
    pub fn detuning_ratio(&self) -> f64 {
        let scale = self.delta.abs().max(self.omega_a.norm()).max(self.omega_b.norm());
        if scale == 0.0 {
            f64::INFINITY
        } else {
            self.bigdelta.abs() / scale
        }
    }

    pub fn regime_warning(&self) -> Option<String> {
        let ratio = self.detuning_ratio();
        (ratio < 10.0).then(|| {
            format!("|bigdelta| is only {ratio:.3} times the largest of |delta|, |omega_a|, |omega_b|; adiabatic elimination needs >= 10")
        })
    }
}

/// Effective Hamiltonian on `{|a⟩, |b⟩}`:
/// `H′ = H_S − Σ_{jk} Ω_j* Ω_k / (4Δ) |j⟩⟨k|`, with `H_S = diag(−δ/2, δ/2)`.
pub fn lambda_effective_hamiltonian(p: &LambdaParams) -> Result<CMatrix> {
    p.validate()?;
    let omega = [p.omega_a, p.omega_b];
    let four_delta = 4.0 * p.bigdelta;
    let mut h = CMatrix::from_shape_fn((2, 2), |(j, k)| -(omega[j].conj() * omega[k]) / four_delta);
    h[[0, 0]] += -p.delta / 2.0;
    h[[1, 1]] += p.delta / 2.0;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;

    fn params(a: C64, b: C64, delta: f64, bigdelta: f64) -> LambdaParams {
        LambdaParams {
            omega_a: a,
            omega_b: b,
            delta,
            bigdelta,
        }
    }

    #[test]
    fn single_drive_limit() {
        let h = lambda_effective_hamiltonian(&params(C64::new(0.6, 0.8), C64::new(0.0, 0.0), 0.4, 20.0)).unwrap();
        assert!((h[[0, 0]].re - (-0.2 - 1.0 / 80.0)).abs() < 1e-15);
        assert!((h[[1, 1]].re - 0.2).abs() < 1e-15);
        assert_eq!(h[[0, 1]], C64::new(0.0, 0.0));
    }

    #[test]
    fn symmetric_drive() {
        let one = C64::new(1.0, 0.0);
        let h = lambda_effective_hamiltonian(&params(one, one, 0.0, 10.0)).unwrap();
        for z in h.iter() {
            assert!((z - C64::new(-0.025, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn complex_drive_phase_follows_the_hamiltonian() {
        // ⟨a|H′|b⟩ = −Ω_a* Ω_b / (4Δ) = −(1)(2i)/40
        let h = lambda_effective_hamiltonian(&params(C64::new(1.0, 0.0), C64::new(0.0, 2.0), 0.2, 10.0)).unwrap();
        assert!((h[[0, 1]] - C64::new(0.0, -0.05)).norm() < 1e-15);
        assert!((h[[1, 0]] - C64::new(0.0, 0.05)).norm() < 1e-15);
    }

    #[test]
    fn matches_exact_three_level_spectrum() {
        // low-lying eigenvalues of the full Hamiltonian agree to O(Ω⁴/Δ³)
        let p = params(C64::new(0.3, 0.4), C64::new(-0.2, 0.5), 0.1, 100.0);
        let full = crate::models::build_lambda(&p).unwrap().h_full;
        let (exact, vecs) = eigh(&full).unwrap();
        let (approx, approx_vecs) = eigh(&lambda_effective_hamiltonian(&p).unwrap()).unwrap();
        for k in 0..2 {
            assert!((exact[k] - approx[k]).abs() < 1e-6, "{exact} vs {approx}");
            // eigenvectors agree up to phase on the ground block
            let overlap: C64 = (0..2).map(|i| vecs[[i, k]].conj() * approx_vecs[[i, k]]).sum();
            assert!(overlap.norm() > 1.0 - 1e-4);
        }
    }

    #[test]
    fn zero_detuning_rejected() {
        let err = lambda_effective_hamiltonian(&params(C64::new(1.0, 0.0), C64::new(1.0, 0.0), 0.0, 0.0)).unwrap_err();
        assert!(err.to_string().contains("bigdelta must be nonzero"));
    }
}
