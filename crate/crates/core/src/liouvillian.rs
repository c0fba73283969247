//! Full Liouvillians `L(t) = L_S + L_B + L_Int(t)`, the product-state
//! projector pair and the structural identities that tie them together.

use std::sync::OnceLock;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::sparse::CompiledSuperOp;
use crate::superop::{
    commutator_superop, kron, CMatrix, DensityMatrix, SuperOperator, TensorSpace,
};

/// Which part of the split `L = L_S + L_B + L_Int` a contribution belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    System,
    Bath,
    Interaction,
    Unlabeled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladTerm {
    jump: CMatrix,
    rate: f64,
}

impl LindbladTerm {
    pub fn new(jump: CMatrix, rate: f64) -> Result<Self> {
        linalg::require_square(&jump, "Lindblad jump operator")?;
        if rate < 0.0 || !rate.is_finite() {
            return Err(Error::NegativeRate(rate));
        }
        Ok(LindbladTerm { jump, rate })
    }

    /// A jump acting on one tensor factor, embedded into the full space.
    pub fn on_factor(jump: &CMatrix, rate: f64, space: &TensorSpace, factor: usize) -> Result<Self> {
        Self::new(embed(jump, space, factor)?, rate)
    }

    pub fn jump(&self) -> &CMatrix {
        &self.jump
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on the given factor.
pub fn embed(op: &CMatrix, space: &TensorSpace, factor: usize) -> Result<CMatrix> {
    let d = space.factor(factor)?;
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch {
            context: "embed",
            expected: d,
            found: op.nrows(),
        });
    }
    let before: usize = space.dims()[..factor].iter().product();
    let after: usize = space.dims()[factor + 1..].iter().product();
    Ok(kron(&kron(&linalg::identity(before), op), &linalg::identity(after)))
}

/// `superop · e^{iωt}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatoryPiece {
    pub superop: SuperOperator,
    pub freq: f64,
    pub part: Part,
}

#[derive(Debug, Clone)]
pub struct LiouvillianSpec {
    hilbert_dim: usize,
    space: Option<TensorSpace>,
    static_parts: Vec<(Part, SuperOperator)>,
    // summed on first use
    static_sum: OnceLock<SuperOperator>,
    pieces: Vec<OscillatoryPiece>,
}

impl PartialEq for LiouvillianSpec {
    fn eq(&self, other: &Self) -> bool {
        self.hilbert_dim == other.hilbert_dim
            && self.space == other.space
            && self.static_parts == other.static_parts
            && self.pieces == other.pieces
    }
}

impl LiouvillianSpec {
    pub fn new(hilbert_dim: usize) -> Self {
        LiouvillianSpec {
            hilbert_dim,
            space: None,
            static_parts: Vec::new(),
            static_sum: OnceLock::new(),
            pieces: Vec::new(),
        }
    }

    pub fn on_space(space: TensorSpace) -> Self {
        let mut spec = Self::new(space.total_dim());
        spec.space = Some(space);
        spec
    }

    fn check_dim(&self, s: &SuperOperator) -> Result<()> {
        if s.hilbert_dim() != self.hilbert_dim {
            return Err(Error::DimensionMismatch {
                context: "Liouvillian contribution",
                expected: self.hilbert_dim,
                found: s.hilbert_dim(),
            });
        }
        Ok(())
    }

    pub fn with_static(mut self, part: Part, s: SuperOperator) -> Result<Self> {
        self.check_dim(&s)?;
        self.static_sum = OnceLock::new();
        self.static_parts.push((part, s));
        Ok(self)
    }

    pub fn with_piece(mut self, part: Part, s: SuperOperator, freq: f64) -> Result<Self> {
        self.check_dim(&s)?;
        self.pieces.push(OscillatoryPiece { superop: s, freq, part });
        Ok(self)
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn space(&self) -> Option<&TensorSpace> {
        self.space.as_ref()
    }

    pub fn static_part(&self) -> &SuperOperator {
        self.static_sum.get_or_init(|| {
            let mut parts = self.static_parts.iter().map(|(_, s)| s);
            let mut sum = match parts.next() {
                Some(first) => first.clone(),
                None => SuperOperator::zeros(self.hilbert_dim),
            };
            for s in parts {
                sum += s;
            }
            sum
        })
    }

    pub fn static_components(&self) -> &[(Part, SuperOperator)] {
        &self.static_parts
    }

    pub fn pieces(&self) -> &[OscillatoryPiece] {
        &self.pieces
    }

    pub fn is_time_independent(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Sum of the static contributions carrying `part`.
    pub fn static_of(&self, part: Part) -> SuperOperator {
        self.static_parts
            .iter()
            .filter(|(p, _)| *p == part)
            .fold(SuperOperator::zeros(self.hilbert_dim), |acc, (_, s)| &acc + s)
    }

    /// `static_part + Σ_k e^{iω_k t} superop_k`.
    pub fn evaluate_at(&self, t: f64) -> SuperOperator {
        self.pieces.iter().fold(self.static_part().clone(), |acc, piece| {
            &acc + &piece.superop.scale(C64::from_polar(1.0, piece.freq * t))
        })
    }

    /// Time derivative `Σ_k iω_k e^{iω_k t} superop_k`.
    pub fn derivative_at(&self, t: f64) -> SuperOperator {
        self.pieces.iter().fold(SuperOperator::zeros(self.hilbert_dim), |acc, piece| {
            let phase = C64::new(0.0, piece.freq) * C64::from_polar(1.0, piece.freq * t);
            &acc + &piece.superop.scale(phase)
        })
    }

    /// Largest trace or Hermiticity defect of `L(t)ρ` over a set of random
    /// times and Hermitian inputs; a valid generator gives round-off only.
    pub fn generator_defect(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let t = rng.random_range(-10.0..10.0);
            let rho = linalg::random_hermitian(&mut rng, self.hilbert_dim, 1.0);
            let out = self.evaluate_at(t).apply(&rho).expect("dimensions are consistent");
            worst = worst
                .max(linalg::trace(&out).norm())
                .max(linalg::hermiticity_residual(&out));
        }
        worst
    }
}

/// `−i[h, ·] + Σ rate·𝔇_jump`.
pub fn assemble_static(h: &CMatrix, terms: &[LindbladTerm]) -> Result<SuperOperator> {
    let mut total = commutator_superop(h)?;
    for term in terms {
        if term.jump.nrows() != h.nrows() {
            return Err(Error::DimensionMismatch {
                context: "assemble_static",
                expected: h.nrows(),
                found: term.jump.nrows(),
            });
        }
        if term.rate < 0.0 || !term.rate.is_finite() {
            return Err(Error::NegativeRate(term.rate));
        }
        total.add_dissipator(&term.jump, term.rate);
    }
    Ok(total)
}

/// `P(X) = Tr_B[X] ⊗ ρ_B` and `Q = I − P`.
#[derive(Debug, Clone)]
pub struct ProjectorPair {
    pub p: SuperOperator,
    pub q: SuperOperator,
    pub bath_state: DensityMatrix,
    pub space: TensorSpace,
    compiled_p: CompiledSuperOp,
}

impl ProjectorPair {
    /// Applies `P` to a full-space matrix without forming the superoperator product.
    pub fn project(&self, x: &CMatrix) -> Result<CMatrix> {
        let reduced = crate::superop::partial_trace_matrix(x, &self.space, 0)?;
        Ok(kron(&reduced, self.bath_state.matrix()))
    }

    pub fn compiled_p(&self) -> &CompiledSuperOp {
        &self.compiled_p
    }
}

pub fn build_projector(bath_state: &DensityMatrix, space: &TensorSpace) -> Result<ProjectorPair> {
    if space.dims().len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "projector needs a system ⊗ bath space, got {} factors",
            space.dims().len()
        )));
    }
    let (ds, db) = (space.system_dim(), space.bath_dim());
    if bath_state.dim() != db {
        return Err(Error::DimensionMismatch {
            context: "build_projector",
            expected: db,
            found: bath_state.dim(),
        });
    }
    let d = ds * db;
    let rho_b = bath_state.matrix();
    let mut p = Array2::zeros((d * d, d * d));
    // Tr_B(|s b⟩⟨s' b'|) = δ_{bb'} |s⟩⟨s'|, then ⊗ ρ_B
    for s in 0..ds {
        for sp in 0..ds {
            for b in 0..db {
                let col = (s * db + b) + (sp * db + b) * d;
                for c in 0..db {
                    for cp in 0..db {
                        let row = (s * db + c) + (sp * db + cp) * d;
                        p[[row, col]] = rho_b[[c, cp]];
                    }
                }
            }
        }
    }
    let mut q = p.mapv(|z| -z);
    q.diag_mut().mapv_inplace(|z| z + 1.0);
    let p = SuperOperator::from_matrix(p, d)?;
    let q = SuperOperator::from_matrix(q, d)?;
    let compiled_p = CompiledSuperOp::from_superop(&p);
    Ok(ProjectorPair {
        p,
        q,
        bath_state: bath_state.clone(),
        space: space.clone(),
        compiled_p,
    })
}

/// Max-entry residuals of the projector identities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StructureReport {
    /// `max(|P² − P|, |Q² − Q|)`
    pub idempotence: f64,
    /// `max(|PQ|, |QP|)`
    pub orthogonality: f64,
    /// `|P + Q − I|`
    pub completeness: f64,
    /// `|L_S P − P L_S|`
    pub system_commutes: f64,
    /// `|L_B P|`
    pub bath_right: f64,
    /// `|P L_B|`
    pub bath_left: f64,
    /// `|P L_Int P|`, over the static interaction and every oscillating piece
    pub interaction_first_order: f64,
    /// `|L_B (I/d_S ⊗ ρ_B)|`
    pub bath_stationarity: f64,
}

impl StructureReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.idempotence,
            self.orthogonality,
            self.completeness,
            self.system_commutes,
            self.bath_right,
            self.bath_left,
            self.interaction_first_order,
            self.bath_stationarity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn named(&self) -> [(&'static str, f64); 8] {
        [
            ("idempotence", self.idempotence),
            ("orthogonality", self.orthogonality),
            ("completeness", self.completeness),
            ("system_commutes", self.system_commutes),
            ("bath_right", self.bath_right),
            ("bath_left", self.bath_left),
            ("interaction_first_order", self.interaction_first_order),
            ("bath_stationarity", self.bath_stationarity),
        ]
    }
}

pub fn check_structure(spec: &LiouvillianSpec, proj: &ProjectorPair) -> Result<StructureReport> {
    if spec.static_parts.iter().any(|(p, _)| *p == Part::Unlabeled)
        || spec.pieces.iter().any(|p| p.part == Part::Unlabeled)
    {
        return Err(Error::MissingLabel("every contribution must be labeled L_S, L_B or L_Int"));
    }
    let d = proj.space.total_dim();
    if spec.hilbert_dim() != d {
        return Err(Error::DimensionMismatch {
            context: "check_structure",
            expected: d,
            found: spec.hilbert_dim(),
        });
    }
    let cp = proj.compiled_p();
    let cq = CompiledSuperOp::from_superop(&proj.q);
    let ident = CompiledSuperOp::identity(d * d);
    let one = C64::new(1.0, 0.0);

    let mut report = StructureReport {
        idempotence: cp.compose(cp).max_abs_diff(cp).max(cq.compose(&cq).max_abs_diff(&cq)),
        orthogonality: cp.compose(&cq).max_abs().max(cq.compose(cp).max_abs()),
        completeness: cp.combine(one, &cq, one).max_abs_diff(&ident),
        ..Default::default()
    };

    let mut system_parts: Vec<&SuperOperator> = Vec::new();
    let mut bath_parts: Vec<&SuperOperator> = Vec::new();
    let mut int_parts: Vec<&SuperOperator> = Vec::new();
    for (part, s) in &spec.static_parts {
        match part {
            Part::System => system_parts.push(s),
            Part::Bath => bath_parts.push(s),
            Part::Interaction => int_parts.push(s),
            Part::Unlabeled => unreachable!(),
        }
    }
    for piece in &spec.pieces {
        match piece.part {
            Part::System => system_parts.push(&piece.superop),
            Part::Bath => bath_parts.push(&piece.superop),
            Part::Interaction => int_parts.push(&piece.superop),
            Part::Unlabeled => unreachable!(),
        }
    }

    for s in system_parts {
        let cs = CompiledSuperOp::from_superop(s);
        report.system_commutes = report.system_commutes.max(cs.compose(cp).max_abs_diff(&cp.compose(&cs)));
    }
    let ds = proj.space.system_dim();
    let reference = kron(&linalg::identity(ds).mapv(|z| z / ds as f64), proj.bath_state.matrix());
    let reference = crate::superop::vectorize(&reference)?;
    for s in bath_parts {
        let cs = CompiledSuperOp::from_superop(s);
        report.bath_right = report.bath_right.max(cs.compose(cp).max_abs());
        report.bath_left = report.bath_left.max(cp.compose(&cs).max_abs());
        report.bath_stationarity = report.bath_stationarity.max(linalg::max_abs_vec(&cs.apply(&reference)));
    }
    for s in int_parts {
        let cs = CompiledSuperOp::from_superop(s);
        let plp = cp.compose(&cs).compose(cp);
        report.interaction_first_order = report.interaction_first_order.max(plp.max_abs());
    }
    Ok(report)
}
