use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::linalg::{dagger, identity};
use crate::liouvillian::{assemble_static, LindbladTerm, LiouvillianSpec, Part};
use crate::models::fock_annihilation;
use crate::reductions::{
    second_order_generator, steady_occupation, InteractionPiece, InteractionSpec, Method, OptomechParams,
    ReducedGenerator, SecondOrderOptions,
};
use crate::superop::{commutator_general, commutator_superop, kron, CMatrix, DensityMatrix, SuperOperator, TensorSpace};

/// Full-space operators on `mechanics ⊗ cavity`.
#[derive(Debug, Clone)]
pub struct OptomechOps {
    pub a: CMatrix,
    pub b: CMatrix,
    pub n_a: CMatrix,
    pub n_b: CMatrix,
}

#[derive(Debug, Clone)]
pub struct OptomechModel {
    pub params: OptomechParams,
    pub space: TensorSpace,
    /// Frame rotating at the drive; static.
    pub spec_schrodinger: LiouvillianSpec,
    /// Interaction picture with respect to `Ω_m b†b`; pieces at `±Ω_m`.
    pub spec_interaction: LiouvillianSpec,
    pub ops: OptomechOps,
    /// `(g a + g* a†)` coupled to `b e^{−iΩ_m t}` and `b† e^{iΩ_m t}`.
    pub interaction: InteractionSpec,
    /// `−i[δ a†a, ·] + κ 𝔇_a` on the cavity alone.
    pub bath_liouvillian: SuperOperator,
    pub bath_state: DensityMatrix,
    pub warnings: Vec<String>,
}

pub fn build_optomech(p: &OptomechParams) -> Result<OptomechModel> {
    p.validate()?;
    let (nm, nc) = (p.n_mech, p.n_cav);
    let space = TensorSpace::bipartite(nm, nc)?;
    let bm = fock_annihilation(nm)?;
    let ac = fock_annihilation(nc)?;
    let (im, ic) = (identity(nm), identity(nc));
    let b = kron(&bm, &ic);
    let a = kron(&im, &ac);
    let n_b = dagger(&b).dot(&b);
    let n_a = dagger(&a).dot(&a);

    let mech_damping = [
        LindbladTerm::new(dagger(&b), p.gamma_m * p.nbar)?,
        LindbladTerm::new(b.clone(), p.gamma_m * (p.nbar + 1.0))?,
    ];
    let ls_free = assemble_static(&n_b.mapv(|z| z * p.omega_m), &mech_damping)?;
    let ls_frame = assemble_static(&CMatrix::zeros(n_b.raw_dim()), &mech_damping)?;
    let lb = assemble_static(&n_a.mapv(|z| z * p.delta), &[LindbladTerm::new(a.clone(), p.kappa)?])?;

    let bath_op_cav = ac.mapv(|z| z * p.g) + dagger(&ac).mapv(|z| z * p.g.conj());
    let bath_op = kron(&im, &bath_op_cav);
    let quadrature = &b + &dagger(&b);
    let lint = commutator_superop(&bath_op.dot(&quadrature))?;

    let spec_schrodinger = LiouvillianSpec::on_space(space.clone())
        .with_static(Part::System, ls_free)?
        .with_static(Part::Bath, lb.clone())?
        .with_static(Part::Interaction, lint)?;
    let spec_interaction = LiouvillianSpec::on_space(space.clone())
        .with_static(Part::System, ls_frame)?
        .with_static(Part::Bath, lb)?
        .with_piece(Part::Interaction, commutator_general(&bath_op.dot(&b)), -p.omega_m)?
        .with_piece(Part::Interaction, commutator_general(&bath_op.dot(&dagger(&b))), p.omega_m)?;

    let interaction = InteractionSpec::new(
        nm,
        nc,
        vec![
            InteractionPiece::new(bm.clone(), bath_op_cav.clone(), -p.omega_m),
            InteractionPiece::new(dagger(&bm), bath_op_cav, p.omega_m),
        ],
    )?;
    let bath_liouvillian = assemble_static(
        &dagger(&ac).dot(&ac).mapv(|z| z * p.delta),
        &[LindbladTerm::new(ac.clone(), p.kappa)?],
    )?;

    let mut warnings = Vec::new();
    match steady_occupation(p) {
        Ok(occ) => {
            if occ + 5.0 * occ.sqrt() > nm as f64 / 2.0 {
                warnings.push(format!(
                    "mechanical cutoff {nm} is small for a predicted occupation of {occ:.4}"
                ));
            }
        }
        Err(e) => warnings.push(e.to_string()),
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    Ok(OptomechModel {
        params: *p,
        space,
        spec_schrodinger,
        spec_interaction,
        ops: OptomechOps { a, b, n_a, n_b },
        interaction,
        bath_liouvillian,
        bath_state: DensityMatrix::basis(nc, 0)?,
        warnings,
    })
}

impl OptomechModel {
    /// Born generator of the cavity-induced mechanical dynamics (secular),
    /// with the rates read back from it.
    pub fn born_generator(&self) -> Result<ReducedGenerator> {
        let opts = SecondOrderOptions {
            method: Method::Sideband,
            secular: true,
            reference_freq: None,
            ..Default::default()
        };
        second_order_generator(&self.bath_liouvillian, &self.interaction, &self.bath_state, opts)
    }

    /// `U(t) = exp(−iΩ_m b†b t)` on the mechanical factor, for moving states
    /// between the interaction picture and the drive frame.
    pub fn mechanical_rotation(&self, t: f64) -> CMatrix {
        let n = self.params.n_mech;
        let mut u = CMatrix::zeros((n, n));
        for k in 0..n {
            u[[k, k]] = C64::from_polar(1.0, -self.params.omega_m * k as f64 * t);
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::steady_state;
    use crate::liouvillian::{build_projector, check_structure};
    use crate::models::thermal_state;
    use crate::reductions::{extract_sideband_rates, sideband_rates};

    fn params() -> OptomechParams {
        OptomechParams {
            omega_m: 2.0,
            delta: 2.0,
            kappa: 0.8,
            gamma_m: 0.05,
            nbar: 0.3,
            g: C64::new(0.04, 0.03),
            n_cav: 3,
            n_mech: 4,
        }
    }

    #[test]
    fn uncoupled_steady_state_is_thermal_times_vacuum() {
        let p = OptomechParams {
            g: C64::new(0.0, 0.0),
            n_mech: 6,
            ..params()
        };
        let m = build_optomech(&p).unwrap();
        let ss = steady_state(m.spec_schrodinger.static_part()).unwrap();
        let expected = thermal_state(6, p.nbar).unwrap().tensor(&DensityMatrix::basis(3, 0).unwrap());
        assert!(crate::linalg::max_abs(&(ss.matrix() - expected.matrix())) < 1e-8);
    }

    #[test]
    fn pictures_agree_at_zero() {
        let p = params();
        let m = build_optomech(&p).unwrap();
        let freqs: Vec<f64> = m.spec_interaction.pieces().iter().map(|x| x.freq).collect();
        assert_eq!(freqs, vec![-p.omega_m, p.omega_m]);
        let free = commutator_superop(&m.ops.n_b.mapv(|z| z * p.omega_m)).unwrap();
        let diff = &(&m.spec_schrodinger.evaluate_at(0.0) - &free) - &m.spec_interaction.evaluate_at(0.0);
        assert!(diff.max_abs() < 1e-12);
    }

    #[test]
    fn generators_are_valid_and_structured() {
        let m = build_optomech(&params()).unwrap();
        assert!(m.spec_schrodinger.generator_defect(10, 1) < 1e-10);
        assert!(m.spec_interaction.generator_defect(10, 2) < 1e-10);
        let proj = build_projector(&m.bath_state, &m.space).unwrap();
        for spec in [&m.spec_schrodinger, &m.spec_interaction] {
            let r = check_structure(spec, &proj).unwrap();
            assert!(r.max_residual() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn born_rates_match_closed_form() {
        let p = params();
        let m = build_optomech(&p).unwrap();
        let reduced = m.born_generator().unwrap();
        let (gh, gc, dm) = extract_sideband_rates(&reduced.generator).unwrap();
        let r = sideband_rates(&p);
        assert!((gh - r.gamma_h).abs() < 1e-10 * r.gamma_h, "{gh} {}", r.gamma_h);
        assert!((gc - r.gamma_c).abs() < 1e-10 * r.gamma_c, "{gc} {}", r.gamma_c);
        assert!((dm - r.delta_m).abs() < 1e-10 * r.delta_m.abs().max(1e-300), "{dm} {}", r.delta_m);
    }

    #[test]
    fn small_cutoff_warns() {
        let p = OptomechParams {
            g: C64::new(0.0, 0.0),
            nbar: 5.0,
            ..params()
        };
        assert!(!build_optomech(&p).unwrap().warnings.is_empty());
    }
}
