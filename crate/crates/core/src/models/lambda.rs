use crate::error::Result;
use crate::linalg::{dagger, matrix_unit, real_diag};
use crate::liouvillian::{LiouvillianSpec, Part};
use crate::reductions::{
    lambda_effective_hamiltonian, second_order_generator, InteractionPiece, InteractionSpec, LambdaParams, Method,
    ReducedGenerator, SecondOrderOptions,
};
use crate::superop::{commutator_superop, kron, CMatrix, DensityMatrix, SuperOperator, TensorSpace};

/// Indices of `|a⟩, |b⟩` in the system factor of the embedded space.
pub const LAMBDA_GROUND: [usize; 2] = [0, 1];

/// The Λ system in two forms: the physical three-level Hamiltonian (basis
/// `|a⟩, |b⟩, |e⟩`) and an embedding on `{a, b, ∅} ⊗ {0, e}` where the
/// excitation lives in the bath factor. `|j⟩ ↦ |j, 0⟩` and `|e⟩ ↦ |∅, e⟩`.
#[derive(Debug, Clone)]
pub struct LambdaModel {
    pub params: LambdaParams,
    pub h_full: CMatrix,
    pub h_s: CMatrix,
    pub space: TensorSpace,
    /// `V = Ŝ ⊗ σ⁺ + Ŝ† ⊗ σ⁻` with `Ŝ = Σ_j (Ω_j/2)|∅⟩⟨j|`.
    pub interaction: InteractionSpec,
    /// `−i[Δ|e⟩⟨e|, ·]` on the bath factor.
    pub bath_liouvillian: SuperOperator,
    pub bath_state: DensityMatrix,
    pub warnings: Vec<String>,
}

pub fn build_lambda(p: &LambdaParams) -> Result<LambdaModel> {
    p.validate()?;
    let mut h_full = real_diag(&[-p.delta / 2.0, p.delta / 2.0, p.bigdelta]);
    for (j, omega) in [p.omega_a, p.omega_b].into_iter().enumerate() {
        h_full[[2, j]] = omega / 2.0;
        h_full[[j, 2]] = omega.conj() / 2.0;
    }
    let h_s = real_diag(&[-p.delta / 2.0, p.delta / 2.0]);

    let mut s = CMatrix::zeros((3, 3));
    s[[2, 0]] = p.omega_a / 2.0;
    s[[2, 1]] = p.omega_b / 2.0;
    let raise = matrix_unit(2, 1, 0);
    let interaction = InteractionSpec::new(
        3,
        2,
        vec![
            InteractionPiece::new(s.clone(), raise.clone(), 0.0),
            InteractionPiece::new(dagger(&s), dagger(&raise), 0.0),
        ],
    )?;
    let bath_liouvillian = commutator_superop(&real_diag(&[0.0, p.bigdelta]))?;
    let warnings = p.regime_warning().into_iter().collect::<Vec<_>>();
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(LambdaModel {
        params: *p,
        h_full,
        h_s,
        space: TensorSpace::bipartite(3, 2)?,
        interaction,
        bath_liouvillian,
        bath_state: DensityMatrix::basis(2, 0)?,
        warnings,
    })
}

impl LambdaModel {
    /// `H_S` extended by zero on `|∅⟩`.
    pub fn h_s_embedded(&self) -> CMatrix {
        let mut h = CMatrix::zeros((3, 3));
        h.slice_mut(ndarray::s![..2, ..2]).assign(&self.h_s);
        h
    }

    /// Physical dynamics `−i[h_full, ·]` on the three-level space.
    pub fn full_spec(&self) -> Result<LiouvillianSpec> {
        LiouvillianSpec::new(3).with_static(Part::Unlabeled, commutator_superop(&self.h_full)?)
    }

    /// Labeled Liouvillian on the embedded space.
    pub fn embedded_spec(&self) -> Result<LiouvillianSpec> {
        let ls = commutator_superop(&kron(&self.h_s_embedded(), &crate::linalg::identity(2)))?;
        let lb = commutator_superop(&kron(&crate::linalg::identity(3), &real_diag(&[0.0, self.params.bigdelta])))?;
        let lint = commutator_superop(&self.interaction.operator_at(0.0))?;
        LiouvillianSpec::on_space(self.space.clone())
            .with_static(Part::System, ls)?
            .with_static(Part::Bath, lb)?
            .with_static(Part::Interaction, lint)
    }

    /// Bath-induced generator on `{|a⟩, |b⟩}`; the `Ŝ ρ Ŝ†` feed into `|∅⟩`
    /// falls outside the block and is dropped with it.
    pub fn reduced_generator(&self) -> Result<ReducedGenerator> {
        let opts = SecondOrderOptions {
            method: Method::FastBath,
            ..Default::default()
        };
        let mut reduced = second_order_generator(&self.bath_liouvillian, &self.interaction, &self.bath_state, opts)?;
        reduced.generator = reduced.generator.restrict(&LAMBDA_GROUND);
        reduced.warnings.extend(self.warnings.iter().cloned());
        Ok(reduced)
    }

    /// `−i[H_S′, ·]` from the closed form.
    pub fn effective_liouvillian(&self) -> Result<SuperOperator> {
        commutator_superop(&lambda_effective_hamiltonian(&self.params)?)
    }

    /// Excited-state projector on the physical space.
    pub fn excited_projector(&self) -> CMatrix {
        matrix_unit(3, 2, 2)
    }
}
