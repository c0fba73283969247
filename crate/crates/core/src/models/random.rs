use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::steady_state;
use crate::error::Result;
use crate::linalg::{identity, matrix_unit, random_density, random_hermitian};
use crate::liouvillian::{assemble_static, LindbladTerm, LiouvillianSpec, Part};
use crate::reductions::{
    mean_field_split, second_order_generator, static_shift, InteractionSpec, Method, ReducedGenerator,
    SecondOrderOptions,
};
use crate::superop::{commutator_superop, kron, CMatrix, DensityMatrix, SuperOperator, TensorSpace};

/// Seeded qubit–qubit model: random Hermitian `H_S`, `H_B` (unit spectral
/// norm) and `V` (spectral norm `coupling`), with the bath qubit decaying at
/// unit rate and starting in its own steady state.
#[derive(Debug, Clone)]
pub struct RandomBipartite {
    pub seed: u64,
    pub coupling: f64,
    pub space: TensorSpace,
    pub h_s: CMatrix,
    pub h_b: CMatrix,
    pub v: CMatrix,
    pub bath_jump: CMatrix,
    pub bath_rate: f64,
    pub bath_state: DensityMatrix,
    pub system_state: DensityMatrix,
}

impl RandomBipartite {
    pub fn generate(seed: u64, coupling: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h_s = random_hermitian(&mut rng, 2, 1.0);
        let h_b = random_hermitian(&mut rng, 2, 1.0);
        let v = random_hermitian(&mut rng, 4, 1.0).mapv(|z| z * coupling);
        let system_state = DensityMatrix::new(random_density(&mut rng, 2))?;
        let bath_jump = matrix_unit(2, 0, 1);
        let bath_rate = 1.0;
        let lb = assemble_static(&h_b, &[LindbladTerm::new(bath_jump.clone(), bath_rate)?])?;
        let bath_state = steady_state(&lb)?;
        Ok(RandomBipartite {
            seed,
            coupling,
            space: TensorSpace::bipartite(2, 2)?,
            h_s,
            h_b,
            v,
            bath_jump,
            bath_rate,
            bath_state,
            system_state,
        })
    }

    /// Same draw with the interaction rescaled to spectral norm `coupling`.
    pub fn with_coupling(&self, coupling: f64) -> Self {
        let factor = if self.coupling == 0.0 { 0.0 } else { coupling / self.coupling };
        RandomBipartite {
            coupling,
            v: self.v.mapv(|z| z * factor),
            ..self.clone()
        }
    }

    /// `L_B` on the bath qubit alone.
    pub fn bath_superop(&self) -> Result<SuperOperator> {
        assemble_static(&self.h_b, &[LindbladTerm::new(self.bath_jump.clone(), self.bath_rate)?])
    }

    pub fn system_superop_full(&self) -> Result<SuperOperator> {
        commutator_superop(&kron(&self.h_s, &identity(2)))
    }

    pub fn bath_superop_full(&self) -> Result<SuperOperator> {
        assemble_static(
            &kron(&identity(2), &self.h_b),
            &[LindbladTerm::on_factor(&self.bath_jump, self.bath_rate, &self.space, 1)?],
        )
    }

    /// Labeled full Liouvillian.
    pub fn spec(&self) -> Result<LiouvillianSpec> {
        self.free_spec()?
            .with_static(Part::Interaction, commutator_superop(&self.v)?)
    }

    /// Full Liouvillian without the interaction.
    pub fn free_spec(&self) -> Result<LiouvillianSpec> {
        LiouvillianSpec::on_space(self.space.clone())
            .with_static(Part::System, self.system_superop_full()?)?
            .with_static(Part::Bath, self.bath_superop_full()?)
    }

    pub fn interaction(&self) -> Result<InteractionSpec> {
        InteractionSpec::from_operator(&self.v, &self.space, 0.0)
    }

    pub fn initial_state(&self) -> DensityMatrix {
        self.system_state.tensor(&self.bath_state)
    }

    /// Mean-field corrected system Hamiltonian `H_S + Tr_B[ρ_B V]`.
    pub fn shifted_hamiltonian(&self) -> Result<CMatrix> {
        let (shift, _) = mean_field_split(&self.interaction()?, &self.bath_state)?;
        Ok(&self.h_s + &static_shift(&shift, 2))
    }

    /// Bath-induced second-order generator in the Schrödinger picture: the
    /// interaction is resolved into Bohr frequencies of the shifted system
    /// Hamiltonian and the result is read at `t = 0`.
    pub fn born_generator(&self, secular: bool) -> Result<ReducedGenerator> {
        let (_, vprime) = mean_field_split(&self.interaction()?, &self.bath_state)?;
        let h = self.shifted_hamiltonian()?;
        let resolved = vprime.frequency_resolved(&h)?;
        let opts = SecondOrderOptions {
            method: Method::Born,
            secular,
            ..Default::default()
        };
        second_order_generator(&self.bath_superop()?, &resolved, &self.bath_state, opts)
    }

    /// `−i[H_S + shift, ·]` plus the Born generator.
    pub fn reduced_liouvillian(&self, secular: bool) -> Result<SuperOperator> {
        let free = commutator_superop(&self.shifted_hamiltonian()?)?;
        self.born_generator(secular)?.with_added(&free)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::build_projector;

    #[test]
    fn seeded_draws_repeat() {
        let a = RandomBipartite::generate(3, 0.5).unwrap();
        let b = RandomBipartite::generate(3, 0.5).unwrap();
        assert_eq!(a.v, b.v);
        assert_eq!(a.bath_state, b.bath_state);
        let c = RandomBipartite::generate(4, 0.5).unwrap();
        assert_ne!(a.v, c.v);
    }

    #[test]
    fn bath_state_is_stationary() {
        let m = RandomBipartite::generate(12, 1.0).unwrap();
        let proj = build_projector(&m.bath_state, &m.space).unwrap();
        let r = crate::liouvillian::check_structure(&m.spec().unwrap(), &proj).unwrap();
        assert!(r.bath_stationarity < 1e-12 && r.bath_right < 1e-12 && r.system_commutes < 1e-12, "{r:?}");
        assert!(m.spec().unwrap().generator_defect(10, 3) < 1e-10);
    }
}
