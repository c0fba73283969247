//! Second-order (Born–Markov) reduced generators with the bath memory
//! integral done exactly as a bath resolvent.

use std::collections::BTreeMap;

use ndarray::{s, Array1};
use ndarray_linalg::{Inverse, SVD};
use num_complex::Complex64 as C64;

use super::interaction::{InteractionSpec, FREQ_TOL};
use super::sideband::extract_sideband_rates;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{self, condition_number, dagger, max_abs};
use crate::superop::{devectorize, kron, vectorize, CMatrix, DensityMatrix, SuperOperator, TensorSpace};

const NULL_TOL: f64 = 1e-10;
const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Born,
    FastBath,
    Sideband,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Born => "born",
            Method::FastBath => "fast_bath",
            Method::Sideband => "sideband",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A system-space generator produced by a reduction. `generator` holds only
/// the bath-induced part unless the producing function says otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedGenerator {
    pub generator: SuperOperator,
    pub method: Method,
    pub rates: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl ReducedGenerator {
    /// `generator + other`, e.g. adding back the free system Liouvillian.
    pub fn with_added(&self, other: &SuperOperator) -> Result<SuperOperator> {
        if other.hilbert_dim() != self.generator.hilbert_dim() {
            return Err(Error::DimensionMismatch {
                context: "reduced generator sum",
                expected: self.generator.hilbert_dim(),
                found: other.hilbert_dim(),
            });
        }
        Ok(&self.generator + other)
    }

    pub fn rate(&self, name: &str) -> Option<f64> {
        self.rates.get(name).copied()
    }
}

/// `−(M)^D` for `M = L_B − iω`, restricted to inputs with no component in
/// the null space of `M`.
#[derive(Debug, Clone)]
pub struct BathResolvent {
    freq: f64,
    dim: usize,
    inverse: CMatrix,
    null_projector: Option<CMatrix>,
}

impl BathResolvent {
    pub fn new(lb: &SuperOperator, freq: f64) -> Result<Self> {
        let dim = lb.hilbert_dim();
        let n = dim * dim;
        let m = lb.matrix() - &linalg::identity(n).mapv(|z| z * C64::new(0.0, freq));
        let singular = |reason: String| Error::ResolventSingular { freq, reason };
        let (u, sigma, vt) = m.svd(true, true)?;
        let (u, vt) = (u.expect("requested"), vt.expect("requested"));
        let smax = sigma[0];
        let null_count = sigma.iter().filter(|&&x| x <= NULL_TOL * smax.max(1.0)).count();
        let null_projector = if null_count == 0 {
            None
        } else {
            let right = dagger(&vt.slice(s![n - null_count.., ..]).to_owned());
            let left = u.slice(s![.., n - null_count..]).to_owned();
            let k = dagger(&left).dot(&right);
            let kinv = k
                .inv()
                .map_err(|_| singular("null space is not semisimple".into()))?;
            if condition_number(&k)? > MAX_CONDITION {
                return Err(singular("null space is not semisimple".into()));
            }
            Some(right.dot(&kinv).dot(&dagger(&left)))
        };
        let shifted = match &null_projector {
            Some(np) => &m - np,
            None => m,
        };
        let cond = condition_number(&shifted)?;
        if !(cond <= MAX_CONDITION) {
            return Err(singular(format!("condition number {cond:e}")));
        }
        Ok(BathResolvent {
            freq,
            dim,
            inverse: shifted.inv()?,
            null_projector,
        })
    }

    pub fn freq(&self) -> f64 {
        self.freq
    }

    /// `∫₀^∞ e^{(L_B − iω)τ} x dτ` for a bath matrix `x`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let v = vectorize(x)?;
        if let Some(np) = &self.null_projector {
            let stuck = np.dot(&v);
            let scale = v.iter().fold(1.0f64, |a, z| a.max(z.norm()));
            if stuck.iter().any(|z| z.norm() > 1e-9 * scale) {
                return Err(Error::ResolventSingular {
                    freq: self.freq,
                    reason: "input has a stationary component".into(),
                });
            }
        }
        let out: Array1<C64> = self.inverse.dot(&v).mapv(|z| -z);
        devectorize(&out, self.dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderOptions {
    pub method: Method,
    /// Keep only pairs with `ω_k + ω_k′ = 0`.
    pub secular: bool,
    /// A system frequency scale; pairs dropped by the secular filter that
    /// oscillate slower than ten times this value are reported.
    pub reference_freq: Option<f64>,
    pub exec: Execution,
}

impl Default for SecondOrderOptions {
    fn default() -> Self {
        SecondOrderOptions {
            method: Method::Born,
            secular: false,
            reference_freq: None,
            exec: Execution::default(),
        }
    }
}

/// Applies `F(·)` to each bath block `X_{(s,·),(s′,·)}` of a full-space matrix.
fn map_bath_blocks<F>(x: &CMatrix, ds: usize, db: usize, f: F) -> Result<CMatrix>
where
    F: Fn(&CMatrix) -> Result<CMatrix>,
{
    let mut out = CMatrix::zeros(x.raw_dim());
    for si in 0..ds {
        for sj in 0..ds {
            let block = x.slice(s![si * db..(si + 1) * db, sj * db..(sj + 1) * db]).to_owned();
            if max_abs(&block) == 0.0 {
                continue;
            }
            out.slice_mut(s![si * db..(si + 1) * db, sj * db..(sj + 1) * db])
                .assign(&f(&block)?);
        }
    }
    Ok(out)
}

fn commutator_apply(o: &CMatrix, x: &CMatrix) -> CMatrix {
    (o.dot(x) - x.dot(o)).mapv(|z| z * C64::new(0.0, -1.0))
}

/// Second-order generator
/// `R(X) = Σ_{k,k′} Tr_B[ 𝒞_k ∫₀^∞ e^{(L_B − iω_k′)τ} Q 𝒞_k′ (X ⊗ ρ_B) dτ ]`,
/// evaluated at `t = 0` (all pairs) or restricted to frequency-matched pairs.
pub fn second_order_generator(
    lb: &SuperOperator,
    v: &InteractionSpec,
    bath_state: &DensityMatrix,
    opts: SecondOrderOptions,
) -> Result<ReducedGenerator> {
    let (ds, db) = (v.system_dim(), v.bath_dim());
    if lb.hilbert_dim() != db || bath_state.dim() != db {
        return Err(Error::DimensionMismatch {
            context: "second_order_generator bath",
            expected: db,
            found: if lb.hilbert_dim() != db { lb.hilbert_dim() } else { bath_state.dim() },
        });
    }
    let first = v
        .first_order(bath_state)?
        .iter()
        .map(|(m, _)| max_abs(m))
        .fold(0.0, f64::max);
    if first > 1e-10 {
        return Err(Error::NonzeroFirstOrder { residual: first });
    }

    let mut warnings = Vec::new();
    let pieces = v.pieces();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut slowest_dropped: Option<f64> = None;
    for k in 0..pieces.len() {
        for kp in 0..pieces.len() {
            let total = pieces[k].freq + pieces[kp].freq;
            if !opts.secular || total.abs() <= FREQ_TOL {
                pairs.push((k, kp));
            } else {
                let w = total.abs();
                slowest_dropped = Some(slowest_dropped.map_or(w, |s: f64| s.min(w)));
            }
        }
    }
    if let (Some(w), Some(reference)) = (slowest_dropped, opts.reference_freq) {
        if w < 10.0 * reference.abs() {
            warnings.push(format!(
                "secular filter dropped a pair oscillating at {w:e}, not fast compared with {reference:e}"
            ));
        }
    }
    if pairs.is_empty() {
        if !pieces.is_empty() {
            let msg = "secular filter removed every term; generator is zero".to_string();
            log::warn!("{msg}");
            warnings.push(msg);
        }
        return Ok(ReducedGenerator {
            generator: SuperOperator::zeros(ds),
            method: opts.method,
            rates: BTreeMap::new(),
            warnings,
        });
    }

    // one resolvent per distinct inner frequency
    let mut resolvents: Vec<BathResolvent> = Vec::new();
    let mut inner_of: Vec<Option<usize>> = vec![None; pieces.len()];
    for &(_, kp) in &pairs {
        if inner_of[kp].is_some() {
            continue;
        }
        let w = pieces[kp].freq;
        let idx = match resolvents.iter().position(|r| (r.freq() - w).abs() <= FREQ_TOL) {
            Some(i) => i,
            None => {
                resolvents.push(BathResolvent::new(lb, w)?);
                resolvents.len() - 1
            }
        };
        inner_of[kp] = Some(idx);
    }
    let ops: Vec<CMatrix> = pieces.iter().map(|p| p.full_operator()).collect();
    let space = TensorSpace::bipartite(ds, db)?;
    let rho_b = bath_state.matrix();

    let column = |col: usize| -> Result<CMatrix> {
        let x = linalg::matrix_unit(ds, col % ds, col / ds);
        let xb = kron(&x, rho_b);
        let mut acc = CMatrix::zeros((ds, ds));
        for kp in 0..pieces.len() {
            let Some(ri) = inner_of[kp] else { continue };
            let y = commutator_apply(&ops[kp], &xb);
            let reduced = crate::superop::partial_trace_matrix(&y, &space, 0)?;
            let qy = y - kron(&reduced, rho_b);
            let z = map_bath_blocks(&qy, ds, db, |b| resolvents[ri].apply(b))?;
            for &(k, _) in pairs.iter().filter(|(_, p)| *p == kp) {
                let outer = commutator_apply(&ops[k], &z);
                acc += &crate::superop::partial_trace_matrix(&outer, &space, 0)?;
            }
        }
        Ok(acc)
    };
    let columns = opts.exec.map_range(ds * ds, column);
    let mut mat = CMatrix::zeros((ds * ds, ds * ds));
    for (col, result) in columns.into_iter().enumerate() {
        mat.column_mut(col).assign(&vectorize(&result?)?);
    }
    let generator = SuperOperator::from_matrix(mat, ds)?;

    let mut rates = BTreeMap::new();
    if opts.method == Method::Sideband && ds >= 3 {
        let (gh, gc, dm) = extract_sideband_rates(&generator)?;
        rates.insert("gamma_h".to_string(), gh);
        rates.insert("gamma_c".to_string(), gc);
        rates.insert("delta_m".to_string(), dm);
    }
    Ok(ReducedGenerator {
        generator,
        method: opts.method,
        rates,
        warnings,
    })
}

/// `−i[h, ·]` restricted to the given basis states of a larger space.
pub fn restricted_commutator(h: &CMatrix, indices: &[usize]) -> Result<SuperOperator> {
    let sub = CMatrix::from_shape_fn((indices.len(), indices.len()), |(i, j)| h[[indices[i], indices[j]]]);
    crate::superop::commutator_superop(&sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::{assemble_static, LindbladTerm};
    use crate::models::RandomBipartite;
    use crate::reductions::interaction::{mean_field_split, InteractionPiece};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_interaction_gives_zero() {
        let lb = assemble_static(&CMatrix::zeros((2, 2)), &[LindbladTerm::new(linalg::matrix_unit(2, 0, 1), 1.0).unwrap()]).unwrap();
        let v = InteractionSpec::empty(3, 2);
        let g = second_order_generator(&lb, &v, &DensityMatrix::basis(2, 0).unwrap(), SecondOrderOptions::default()).unwrap();
        assert_eq!(g.generator.max_abs(), 0.0);
    }

    #[test]
    fn resolvent_is_the_time_integral() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let hb = linalg::random_hermitian(&mut rng, 2, 1.0);
        let lb = assemble_static(&hb, &[LindbladTerm::new(linalg::matrix_unit(2, 0, 1), 1.0).unwrap()]).unwrap();
        let w = 0.7;
        let r = BathResolvent::new(&lb, w).unwrap();
        // traceless input has no stationary component
        let x = linalg::random_complex(&mut rng, 2, 2);
        let x = &x - &linalg::identity(2).mapv(|z| z * linalg::trace(&x) / 2.0);
        let exact = r.apply(&x).unwrap();
        // composite Simpson on a long window
        let m = lb.matrix() - &linalg::identity(4).mapv(|z| z * C64::new(0.0, w));
        let (tmax, n) = (40.0, 8000);
        let h = tmax / n as f64;
        let step = crate::dynamics::expm(&m.mapv(|z| z * h)).unwrap();
        let mut cur = vectorize(&x).unwrap();
        let mut sum: Array1<C64> = cur.clone();
        for k in 1..=n {
            cur = step.dot(&cur);
            let weight = if k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            sum = sum + cur.mapv(|z| z * weight);
        }
        let integral = devectorize(&sum.mapv(|z| z * h / 3.0), 2).unwrap();
        assert!(max_abs(&(integral - exact)) < 1e-8);
    }

    #[test]
    fn stationary_inputs_are_rejected() {
        let lb = assemble_static(&CMatrix::zeros((2, 2)), &[LindbladTerm::new(linalg::matrix_unit(2, 0, 1), 1.0).unwrap()]).unwrap();
        let r = BathResolvent::new(&lb, 0.0).unwrap();
        let err = r.apply(&linalg::matrix_unit(2, 0, 0)).unwrap_err();
        assert!(err.to_string().contains("non-invertible bath resolvent: Markov/RWA limit undefined"));
    }

    #[test]
    fn nonzero_mean_is_rejected() {
        let lb = SuperOperator::zeros(2);
        let v = InteractionSpec::new(2, 2, vec![InteractionPiece::new(linalg::real_diag(&[1.0, 0.0]), linalg::real_diag(&[1.0, 0.0]), 0.0)]).unwrap();
        let err = second_order_generator(&lb, &v, &DensityMatrix::basis(2, 0).unwrap(), SecondOrderOptions::default());
        assert!(matches!(err, Err(Error::NonzeroFirstOrder { .. })));
    }

    #[test]
    fn secular_result_ignores_time_origin() {
        let model = RandomBipartite::generate(7, 0.5).unwrap();
        let (_, vprime) = mean_field_split(&model.interaction().unwrap(), &model.bath_state).unwrap();
        let v = vprime.frequency_resolved(&model.h_s).unwrap();
        let lb = model.bath_superop().unwrap();
        let opts = SecondOrderOptions {
            secular: true,
            ..Default::default()
        };
        let g0 = second_order_generator(&lb, &v, &model.bath_state, opts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..3 {
            let shifted = v.time_shifted(rng.random_range(-10.0..10.0));
            let g = second_order_generator(&lb, &shifted, &model.bath_state, opts).unwrap();
            assert!((&g.generator - &g0.generator).max_abs() < 1e-12);
        }
    }

    #[test]
    fn slow_dropped_pairs_are_reported() {
        let model = RandomBipartite::generate(7, 0.5).unwrap();
        let (_, vprime) = mean_field_split(&model.interaction().unwrap(), &model.bath_state).unwrap();
        let v = vprime.frequency_resolved(&model.h_s).unwrap();
        let opts = SecondOrderOptions {
            secular: true,
            reference_freq: Some(100.0),
            ..Default::default()
        };
        let g = second_order_generator(&model.bath_superop().unwrap(), &v, &model.bath_state, opts).unwrap();
        assert_eq!(g.warnings.len(), 1);
    }

    #[test]
    fn reduced_generators_preserve_trace_and_hermiticity() {
        let model = RandomBipartite::generate(9, 0.3).unwrap();
        let reduced = model.born_generator(false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..5 {
            let x = linalg::random_hermitian(&mut rng, 2, 1.0);
            let y = reduced.generator.apply(&x).unwrap();
            assert!(linalg::trace(&y).norm() < 1e-10);
            assert!(linalg::hermiticity_residual(&y) < 1e-10);
        }
    }
}
