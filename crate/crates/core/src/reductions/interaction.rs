//! Interactions written as `V(t) = Σ_k S_k ⊗ B_k e^{iω_k t}`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, dagger, max_abs, ZERO};
use crate::superop::{commutator_general, expectation_matrix, kron, CMatrix, DensityMatrix, SuperOperator, TensorSpace};

/// Frequencies closer than this are the same frequency.
pub const FREQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionPiece {
    pub system_op: CMatrix,
    pub bath_op: CMatrix,
    pub freq: f64,
}

impl InteractionPiece {
    pub fn new(system_op: CMatrix, bath_op: CMatrix, freq: f64) -> Self {
        InteractionPiece { system_op, bath_op, freq }
    }

    pub fn full_operator(&self) -> CMatrix {
        kron(&self.system_op, &self.bath_op)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSpec {
    system_dim: usize,
    bath_dim: usize,
    pieces: Vec<InteractionPiece>,
}

impl InteractionSpec {
    /// Validates dimensions and that `V(t)` is Hermitian at a few probe times.
    pub fn new(system_dim: usize, bath_dim: usize, pieces: Vec<InteractionPiece>) -> Result<Self> {
        for p in &pieces {
            for (m, d, ctx) in [
                (&p.system_op, system_dim, "interaction system operator"),
                (&p.bath_op, bath_dim, "interaction bath operator"),
            ] {
                if m.nrows() != d || m.ncols() != d {
                    return Err(Error::DimensionMismatch {
                        context: ctx,
                        expected: d,
                        found: m.nrows(),
                    });
                }
            }
        }
        let spec = InteractionSpec {
            system_dim,
            bath_dim,
            pieces,
        };
        let scale = spec.pieces.iter().map(|p| max_abs(&p.full_operator())).fold(1.0, f64::max);
        for t in [0.0, 0.731, 2.417, -5.29] {
            let residual = linalg::hermiticity_residual(&spec.operator_at(t));
            if residual > 1e-10 * scale {
                return Err(Error::NotHermitian { residual });
            }
        }
        Ok(spec)
    }

    pub fn empty(system_dim: usize, bath_dim: usize) -> Self {
        InteractionSpec {
            system_dim,
            bath_dim,
            pieces: Vec::new(),
        }
    }

    /// Every `S ⊗ B` term of a full-space operator, one per bath matrix unit:
    /// `O = Σ_{bc} O_{bc} ⊗ |b⟩⟨c|` with `O_{bc} = Tr_B[O (I ⊗ |c⟩⟨b|)]`.
    pub fn from_operator(op: &CMatrix, space: &TensorSpace, freq: f64) -> Result<Self> {
        let (ds, db) = (space.system_dim(), space.bath_dim());
        linalg::require_square(op, "interaction operator")?;
        if op.nrows() != ds * db {
            return Err(Error::DimensionMismatch {
                context: "interaction operator",
                expected: ds * db,
                found: op.nrows(),
            });
        }
        let mut pieces = Vec::new();
        for b in 0..db {
            for c in 0..db {
                let block = CMatrix::from_shape_fn((ds, ds), |(s, sp)| op[[s * db + b, sp * db + c]]);
                if max_abs(&block) > 0.0 {
                    pieces.push(InteractionPiece::new(block, linalg::matrix_unit(db, b, c), freq));
                }
            }
        }
        Self::new(ds, db, pieces)
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn bath_dim(&self) -> usize {
        self.bath_dim
    }

    pub fn pieces(&self) -> &[InteractionPiece] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn operator_at(&self, t: f64) -> CMatrix {
        let d = self.system_dim * self.bath_dim;
        self.pieces.iter().fold(CMatrix::zeros((d, d)), |acc, p| {
            acc + p.full_operator().mapv(|z| z * C64::from_polar(1.0, p.freq * t))
        })
    }

    /// `−i[V_k, ·]` for every piece, with its frequency.
    pub fn commutator_pieces(&self) -> Vec<(SuperOperator, f64)> {
        self.pieces
            .iter()
            .map(|p| (commutator_general(&p.full_operator()), p.freq))
            .collect()
    }

    /// Same interaction seen from a clock shifted by `s`.
    pub fn time_shifted(&self, s: f64) -> Self {
        InteractionSpec {
            pieces: self
                .pieces
                .iter()
                .map(|p| InteractionPiece {
                    system_op: p.system_op.mapv(|z| z * C64::from_polar(1.0, p.freq * s)),
                    ..p.clone()
                })
                .collect(),
            ..self.clone()
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        InteractionSpec {
            pieces: self
                .pieces
                .iter()
                .map(|p| InteractionPiece {
                    system_op: p.system_op.mapv(|z| z * factor),
                    ..p.clone()
                })
                .collect(),
            ..self.clone()
        }
    }

    /// Interaction picture with respect to a system Hamiltonian `h`: each
    /// system operator is split into components `S_ω` with
    /// `e^{iht} S e^{−iht} = Σ_ω S_ω e^{iωt}`.
    pub fn frequency_resolved(&self, h: &CMatrix) -> Result<Self> {
        if h.nrows() != self.system_dim {
            return Err(Error::DimensionMismatch {
                context: "frequency_resolved Hamiltonian",
                expected: self.system_dim,
                found: h.nrows(),
            });
        }
        let residual = linalg::hermiticity_residual(h);
        if residual > 1e-10 {
            return Err(Error::NotHermitian { residual });
        }
        let (energies, u) = linalg::eigh(h)?;
        let ud = dagger(&u);
        let n = self.system_dim;
        let mut transitions: Vec<(f64, usize, usize)> = (0..n)
            .flat_map(|m| (0..n).map(move |k| (m, k)))
            .map(|(m, k)| (energies[m] - energies[k], m, k))
            .collect();
        transitions.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut groups: Vec<(f64, Vec<(usize, usize)>)> = Vec::new();
        for (w, m, k) in transitions {
            match groups.last_mut() {
                Some((w0, members)) if (w - *w0).abs() <= FREQ_TOL => members.push((m, k)),
                _ => groups.push((w, vec![(m, k)])),
            }
        }
        let mut pieces = Vec::new();
        for p in &self.pieces {
            let s_eig = ud.dot(&p.system_op).dot(&u);
            for (w, members) in &groups {
                let mut comp = CMatrix::zeros((n, n));
                for &(m, k) in members {
                    comp[[m, k]] = s_eig[[m, k]];
                }
                if max_abs(&comp) == 0.0 {
                    continue;
                }
                let back = u.dot(&comp).dot(&ud);
                pieces.push(InteractionPiece::new(back, p.bath_op.clone(), p.freq + w));
            }
        }
        Self::new(self.system_dim, self.bath_dim, pieces)
    }

    /// `Σ_k S_k ⟨B_k⟩`, grouped by frequency.
    pub fn first_order(&self, bath_state: &DensityMatrix) -> Result<Vec<(CMatrix, f64)>> {
        let mut groups: Vec<(CMatrix, f64)> = Vec::new();
        for p in &self.pieces {
            let mean = expectation_matrix(&p.bath_op, bath_state.matrix())?;
            let term = p.system_op.mapv(|z| z * mean);
            match groups.iter_mut().find(|(_, w)| (w - p.freq).abs() <= FREQ_TOL) {
                Some((acc, _)) => *acc += &term,
                None => groups.push((term, p.freq)),
            }
        }
        Ok(groups)
    }
}

/// `Σ_ω shift_ω e^{iωt}`, the system operator `Tr_B[ρ_B V(t)]`.
pub type MeanFieldShift = Vec<(CMatrix, f64)>;

/// Moves `Tr_B[ρ_B V]` into the system part: returns the shift and the
/// interaction with centered bath operators `B_k − ⟨B_k⟩`.
pub fn mean_field_split(v: &InteractionSpec, bath_state: &DensityMatrix) -> Result<(MeanFieldShift, InteractionSpec)> {
    if bath_state.dim() != v.bath_dim {
        return Err(Error::DimensionMismatch {
            context: "mean_field_split bath state",
            expected: v.bath_dim,
            found: bath_state.dim(),
        });
    }
    let shift: MeanFieldShift = v
        .first_order(bath_state)?
        .into_iter()
        .filter(|(m, _)| max_abs(m) > 0.0)
        .collect();
    let ident = linalg::identity(v.bath_dim);
    let mut pieces = Vec::with_capacity(v.pieces.len());
    for p in &v.pieces {
        let mean = expectation_matrix(&p.bath_op, bath_state.matrix())?;
        let centered = if mean == ZERO {
            p.bath_op.clone()
        } else {
            &p.bath_op - &ident.mapv(|z| z * mean)
        };
        pieces.push(InteractionPiece::new(p.system_op.clone(), centered, p.freq));
    }
    Ok((
        shift,
        InteractionSpec {
            pieces,
            ..v.clone()
        },
    ))
}

/// Static part of a shift (its zero-frequency component).
pub fn static_shift(shift: &MeanFieldShift, dim: usize) -> CMatrix {
    shift
        .iter()
        .filter(|(_, w)| w.abs() <= FREQ_TOL)
        .fold(CMatrix::zeros((dim, dim)), |acc, (m, _)| acc + m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_complex, random_density, random_hermitian};
    use crate::models::fock_annihilation;
    use crate::superop::partial_trace_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quadrature(n: usize) -> CMatrix {
        let a = fock_annihilation(n).unwrap();
        &a + &dagger(&a)
    }

    #[test]
    fn vacuum_has_no_shift() {
        let s = crate::linalg::real_diag(&[1.0, -1.0]);
        let v = InteractionSpec::new(2, 4, vec![InteractionPiece::new(s, quadrature(4), 0.0)]).unwrap();
        let (shift, vprime) = mean_field_split(&v, &DensityMatrix::basis(4, 0).unwrap()).unwrap();
        assert!(shift.is_empty());
        assert_eq!(vprime, v);
    }

    #[test]
    fn displaced_bath_gives_linear_shift() {
        // |ψ⟩ = c0|0⟩ + c1|1⟩ with real amplitudes has ⟨a⟩ = c0 c1
        let (c0, c1) = (0.8f64, 0.6f64);
        let alpha = c0 * c1;
        let bath = DensityMatrix::pure(&[C64::new(c0, 0.0), C64::new(c1, 0.0), ZERO]).unwrap();
        let s = crate::linalg::real_diag(&[0.5, -0.25]);
        let v = InteractionSpec::new(2, 3, vec![InteractionPiece::new(s.clone(), quadrature(3), 0.0)]).unwrap();
        let (shift, _) = mean_field_split(&v, &bath).unwrap();
        assert_eq!(shift.len(), 1);
        assert!(max_abs(&(&shift[0].0 - &s.mapv(|z| z * 2.0 * alpha))) < 1e-14);
    }

    #[test]
    fn centered_interaction_has_no_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let space = TensorSpace::bipartite(2, 3).unwrap();
        for _ in 0..10 {
            let op = random_hermitian(&mut rng, 6, 1.0);
            let v = InteractionSpec::from_operator(&op, &space, 0.0).unwrap();
            assert!(max_abs(&(v.operator_at(0.0) - &op)) < 1e-14);
            let bath = DensityMatrix::new(random_density(&mut rng, 3)).unwrap();
            let (_, vprime) = mean_field_split(&v, &bath).unwrap();
            let t = rng.random_range(-5.0..5.0);
            let full = vprime.operator_at(t).dot(&kron(&linalg::identity(2), bath.matrix()));
            let reduced = partial_trace_matrix(&full, &space, 0).unwrap();
            assert!(max_abs(&reduced) < 1e-12);
        }
    }

    #[test]
    fn frequency_resolution_reproduces_interaction_picture() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let h = random_hermitian(&mut rng, 3, 2.0);
        let space = TensorSpace::bipartite(3, 2).unwrap();
        let v = InteractionSpec::from_operator(&random_hermitian(&mut rng, 6, 1.0), &space, 0.0).unwrap();
        let resolved = v.frequency_resolved(&h).unwrap();
        let t = 0.83;
        let u = crate::dynamics::expm(&kron(&h, &linalg::identity(2)).mapv(|z| z * C64::new(0.0, t))).unwrap();
        let expected = u.dot(&v.operator_at(0.0)).dot(&dagger(&u));
        let err = max_abs(&(resolved.operator_at(t) - &expected));
        assert!(err < 1e-12, "{err} {}", max_abs(&(v.operator_at(0.0) - &expected)));
    }

    #[test]
    fn rejects_non_hermitian_sums() {
        let s = random_complex(&mut ChaCha8Rng::seed_from_u64(1), 2, 2);
        assert!(matches!(
            InteractionSpec::new(2, 2, vec![InteractionPiece::new(s, linalg::identity(2), 0.0)]),
            Err(Error::NotHermitian { .. })
        ));
    }
}
