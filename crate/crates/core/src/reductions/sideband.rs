//! Resolved-sideband elimination of a driven cavity coupled linearly to a
//! mechanical mode.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::born::{Method, ReducedGenerator};
use crate::error::{Error, Result};
use crate::linalg::{dagger, matrix_unit};
use crate::liouvillian::{assemble_static, LindbladTerm};
use crate::models::fock_annihilation;
use crate::superop::SuperOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptomechParams {
    pub omega_m: f64,
    pub delta: f64,
    pub kappa: f64,
    pub gamma_m: f64,
    pub nbar: f64,
    pub g: C64,
    pub n_cav: usize,
    pub n_mech: usize,
}

impl OptomechParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        let finite = [self.omega_m, self.delta, self.kappa, self.gamma_m, self.nbar, self.g.re, self.g.im];
        if finite.iter().any(|x| !x.is_finite()) {
            return bad("optomechanical parameters must be finite");
        }
        if self.omega_m <= 0.0 {
            return bad("omega_m must be positive");
        }
        if self.kappa <= 0.0 {
            return bad("kappa must be positive");
        }
        if self.gamma_m < 0.0 {
            return bad("gamma_m must be nonnegative");
        }
        if self.nbar < 0.0 {
            return bad("nbar must be nonnegative");
        }
        if self.n_cav < 2 || self.n_mech < 2 {
            return bad("Fock cutoffs must be at least 2");
        }
        Ok(())
    }
}

/// Which sideband: `λ = +1` (heating) or `λ = −1` (cooling).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sideband {
    Plus,
    Minus,
}

impl Sideband {
    pub fn sign(self) -> f64 {
        match self {
            Sideband::Plus => 1.0,
            Sideband::Minus => -1.0,
        }
    }
}

/// `E_λ(ω) = 1 / (i(δ + λω) + κ/2)`.
pub fn sideband_spectral(delta: f64, kappa: f64, omega: f64, lam: Sideband) -> C64 {
    C64::new(kappa / 2.0, delta + lam.sign() * omega).inv()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandRates {
    pub gamma_h: f64,
    pub gamma_c: f64,
    pub delta_m: f64,
}

pub fn sideband_rates(p: &OptomechParams) -> SidebandRates {
    let g2 = p.g.norm_sqr();
    let half = p.kappa / 2.0;
    let lorentz = |detuning: f64| g2 * p.kappa / (detuning * detuning + half * half);
    let e_plus = sideband_spectral(p.delta, p.kappa, p.omega_m, Sideband::Plus);
    let e_minus = sideband_spectral(p.delta, p.kappa, p.omega_m, Sideband::Minus);
    SidebandRates {
        gamma_h: lorentz(p.delta + p.omega_m),
        gamma_c: lorentz(p.delta - p.omega_m),
        delta_m: g2 * (e_plus + e_minus).im,
    }
}

/// `⟨b†b⟩_ss = (γ_m n̄ + Γ_h) / (γ_m + Γ_c − Γ_h)`.
pub fn steady_occupation(p: &OptomechParams) -> Result<f64> {
    let r = sideband_rates(p);
    let denominator = p.gamma_m + r.gamma_c - r.gamma_h;
    if !(denominator > 0.0) {
        return Err(Error::UnstableReducedModel { denominator });
    }
    Ok((p.gamma_m * p.nbar + r.gamma_h) / denominator)
}

/// `C = 4|g|² / (κ γ_m)`.
pub fn cooperativity(p: &OptomechParams) -> Result<f64> {
    if p.gamma_m <= 0.0 {
        return Err(Error::InvalidParameter("cooperativity needs gamma_m > 0".into()));
    }
    Ok(4.0 * p.g.norm_sqr() / (p.kappa * p.gamma_m))
}

/// Reduced mechanical generator on `n_mech` levels:
/// `−i[Δ_m b†b, ·] + (γ_m n̄ + Γ_h) 𝔇_{b†} + (γ_m(n̄+1) + Γ_c) 𝔇_b`.
/// Includes the intrinsic mechanical damping.
pub fn sideband_generator(p: &OptomechParams) -> Result<ReducedGenerator> {
    sideband_generator_on(p, p.n_mech)
}

/// As [`sideband_generator`] on a different mechanical cutoff.
pub fn sideband_generator_on(p: &OptomechParams, n_mech: usize) -> Result<ReducedGenerator> {
    p.validate()?;
    let r = sideband_rates(p);
    let b = fock_annihilation(n_mech)?;
    let bd = dagger(&b);
    let h = bd.dot(&b).mapv(|z| z * r.delta_m);
    let generator = assemble_static(
        &h,
        &[
            LindbladTerm::new(bd, p.gamma_m * p.nbar + r.gamma_h)?,
            LindbladTerm::new(b, p.gamma_m * (p.nbar + 1.0) + r.gamma_c)?,
        ],
    )?;
    let mut rates = BTreeMap::new();
    rates.insert("gamma_h".to_string(), r.gamma_h);
    rates.insert("gamma_c".to_string(), r.gamma_c);
    rates.insert("delta_m".to_string(), r.delta_m);
    if let Ok(c) = cooperativity(p) {
        rates.insert("cooperativity".to_string(), c);
    }
    Ok(ReducedGenerator {
        generator,
        method: Method::Sideband,
        rates,
        warnings: Vec::new(),
    })
}

/// Ratio of neighbouring steady populations of the reduced model.
fn population_ratio(p: &OptomechParams) -> f64 {
    let r = sideband_rates(p);
    (p.gamma_m * p.nbar + r.gamma_h) / (p.gamma_m * (p.nbar + 1.0) + r.gamma_c)
}

/// Occupation lost by truncating the reduced model at `n` levels: its steady
/// state is geometric, so the truncated mean falls short by `n xⁿ / (1 − xⁿ)`.
pub fn truncation_bias(p: &OptomechParams, n: usize) -> f64 {
    let x = population_ratio(p);
    if x == 0.0 {
        return 0.0;
    }
    let xn = x.powi(n as i32);
    n as f64 * xn / (1.0 - xn)
}

/// Smallest cutoff, not below `p.n_mech`, whose truncation bias is under `tol`.
pub fn adequate_cutoff(p: &OptomechParams, tol: f64) -> Result<usize> {
    steady_occupation(p)?;
    let mut n = p.n_mech.max(2);
    while truncation_bias(p, n) >= tol {
        n += 1;
        if n > 4096 {
            return Err(Error::InvalidParameter("no practical cutoff reaches the requested bias".into()));
        }
    }
    Ok(n)
}

/// Reads `(Γ_h, Γ_c, Δ_m)` off a mechanical generator of Lindblad form
/// through its action on matrix units in the lowest Fock levels.
pub fn extract_sideband_rates(gen: &SuperOperator) -> Result<(f64, f64, f64)> {
    let n = gen.hilbert_dim();
    if n < 3 {
        return Err(Error::InvalidParameter("rate extraction needs a mechanical cutoff of at least 3".into()));
    }
    let heat = gen.apply(&matrix_unit(n, 0, 0))?[[1, 1]].re;
    let cool = gen.apply(&matrix_unit(n, 1, 1))?[[0, 0]].re;
    let coherence = gen.apply(&matrix_unit(n, 0, 1))?[[0, 1]];
    Ok((heat, cool, coherence.im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::steady_state;
    use crate::superop::expectation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn cooling_params() -> OptomechParams {
        OptomechParams {
            omega_m: 10.0,
            delta: 10.0,
            kappa: 1.0,
            gamma_m: 1e-3,
            nbar: 10.0,
            g: C64::new(0.05, 0.0),
            n_cav: 4,
            n_mech: 12,
        }
    }

    #[test]
    fn spectral_density_examples() {
        let e = sideband_spectral(3.0, 0.8, 3.0, Sideband::Minus);
        assert!((e - C64::new(2.0 / 0.8, 0.0)).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..50 {
            let (d, k, w) = (rng.random_range(-20.0..20.0), rng.random_range(0.01..5.0), rng.random_range(-20.0..20.0));
            let plus = sideband_spectral(d, k, w, Sideband::Plus);
            let minus_reflected = sideband_spectral(d, k, -w, Sideband::Minus);
            // the sidebands swap under ω → −ω; with a conjugate only the real parts agree
            assert!((plus - minus_reflected).norm() <= 1e-12 * plus.norm());
            assert!((plus.re - minus_reflected.conj().re).abs() <= 1e-12 * plus.norm());
        }
        let big = sideband_spectral(1.0, 1e8, 2.0, Sideband::Plus);
        assert!((big.norm() - 2e-8).abs() < 1e-15);
    }

    #[test]
    fn rate_examples() {
        let mut p = cooling_params();
        let r = sideband_rates(&p);
        assert!((r.gamma_c - 4.0 * p.g.norm_sqr() / p.kappa).abs() < 1e-12 * r.gamma_c);
        assert!((r.gamma_c - 0.01).abs() < 1e-15);
        assert!((r.gamma_h - 6.246096189881324e-6).abs() < 1e-12);
        p.g = C64::new(0.0, 0.0);
        let r = sideband_rates(&p);
        assert_eq!((r.gamma_h, r.gamma_c, r.delta_m), (0.0, 0.0, 0.0));

        let p = OptomechParams { kappa: 0.5, ..cooling_params() };
        let r = sideband_rates(&p);
        let approx = (p.kappa / (4.0 * p.omega_m)).powi(2);
        assert!((r.gamma_h / r.gamma_c - approx).abs() < 1e-3 * approx);
    }

    #[test]
    fn occupation_examples() {
        let p = cooling_params();
        let occ = steady_occupation(&p).unwrap();
        assert!((occ - 0.910).abs() < 5e-4, "{occ}");
        let c = cooperativity(&p).unwrap();
        assert!((c - 10.0).abs() < 1e-12);
        let approx = p.nbar / (1.0 + c);
        assert!((occ - approx).abs() < 2e-3 * occ);

        let free = OptomechParams { g: C64::new(0.0, 0.0), ..p };
        assert!((steady_occupation(&free).unwrap() - p.nbar).abs() < 1e-12);
        assert_eq!(cooperativity(&free).unwrap(), 0.0);
        let doubled = OptomechParams { g: p.g * 2.0, ..p };
        assert!((cooperativity(&doubled).unwrap() - 4.0 * c).abs() < 1e-12);
        assert!(cooperativity(&OptomechParams { gamma_m: 0.0, ..p }).is_err());

        let heating = OptomechParams { delta: -10.0, gamma_m: 0.0, ..p };
        assert!(matches!(steady_occupation(&heating), Err(Error::UnstableReducedModel { .. })));
    }

    #[test]
    fn generator_steady_state_is_the_closed_form() {
        let p = cooling_params();
        let n = adequate_cutoff(&p, 1e-9).unwrap();
        let reduced = sideband_generator_on(&p, n).unwrap();
        let ss = steady_state(&reduced.generator).unwrap();
        let b = fock_annihilation(n).unwrap();
        let occ = expectation(&dagger(&b).dot(&b), &ss).unwrap().re;
        assert!((occ - steady_occupation(&p).unwrap()).abs() < 1e-6);

        // on a short cutoff the only discrepancy is the geometric tail
        let short = 20;
        let ss = steady_state(&sideband_generator_on(&p, short).unwrap().generator).unwrap();
        let b = fock_annihilation(short).unwrap();
        let occ_short = expectation(&dagger(&b).dot(&b), &ss).unwrap().re;
        let predicted = steady_occupation(&p).unwrap() - truncation_bias(&p, short);
        assert!((occ_short - predicted).abs() < 1e-9);
    }

    #[test]
    fn uncoupled_mode_thermalizes() {
        let p = OptomechParams { g: C64::new(0.0, 0.0), nbar: 0.5, n_mech: 40, ..cooling_params() };
        let ss = steady_state(&sideband_generator(&p).unwrap().generator).unwrap();
        let b = fock_annihilation(40).unwrap();
        let occ = expectation(&dagger(&b).dot(&b), &ss).unwrap().re;
        assert!((occ - 0.5).abs() < 1e-6);
    }

    #[test]
    fn generator_is_trace_preserving_and_rates_round_trip() {
        let p = cooling_params();
        let reduced = sideband_generator(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let x = crate::linalg::random_hermitian(&mut rng, p.n_mech, 1.0);
        let y = reduced.generator.apply(&x).unwrap();
        assert!(crate::linalg::trace(&y).norm() < 1e-12);
        let (gh, gc, dm) = extract_sideband_rates(&reduced.generator).unwrap();
        let r = sideband_rates(&p);
        assert!((gh - (p.gamma_m * p.nbar + r.gamma_h)).abs() < 1e-14);
        assert!((gc - (p.gamma_m * (p.nbar + 1.0) + r.gamma_c)).abs() < 1e-14);
        assert!((dm - r.delta_m).abs() < 1e-14);
    }
}
