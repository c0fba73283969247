use std::collections::BTreeMap;

use ndarray::Array1;
use num_complex::Complex64 as C64;

use super::{TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{ONE, ZERO};
use crate::liouvillian::LiouvillianSpec;
use crate::sparse::CompiledSuperOp;
use crate::superop::{devectorize, expectation_matrix, CMatrix, DensityMatrix, Tolerances};

/// `L(t)` in compressed form: the static part plus one matrix per piece.
#[derive(Debug, Clone)]
pub struct CompiledLiouvillian {
    static_part: CompiledSuperOp,
    pieces: Vec<(CompiledSuperOp, f64)>,
}

impl CompiledLiouvillian {
    pub fn new(spec: &LiouvillianSpec) -> Self {
        CompiledLiouvillian {
            static_part: CompiledSuperOp::from_superop(spec.static_part()),
            pieces: spec
                .pieces()
                .iter()
                .map(|p| (CompiledSuperOp::from_superop(&p.superop), p.freq))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.static_part.dim()
    }

    /// `out = L(t) x`.
    pub fn apply_into(&self, t: f64, x: &[C64], out: &mut [C64], exec: Execution) {
        out.iter_mut().for_each(|z| *z = ZERO);
        self.static_part.mul_add(x, ONE, out, exec);
        for (s, freq) in &self.pieces {
            s.mul_add(x, C64::from_polar(1.0, freq * t), out, exec);
        }
    }
}

/// Classical RK4 stepper with preallocated stage buffers.
pub(crate) struct Rk4 {
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Rk4 {
    pub(crate) fn new(n: usize) -> Self {
        Rk4 {
            k: std::array::from_fn(|_| vec![ZERO; n]),
            tmp: vec![ZERO; n],
        }
    }

    pub(crate) fn step(&mut self, l: &CompiledLiouvillian, t: f64, h: f64, x: &mut [C64], exec: Execution) {
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        l.apply_into(t, x, k1, exec);
        for ((y, &xi), &k) in tmp.iter_mut().zip(x.iter()).zip(k1.iter()) {
            *y = xi + k * (0.5 * h);
        }
        l.apply_into(t + 0.5 * h, tmp, k2, exec);
        for ((y, &xi), &k) in tmp.iter_mut().zip(x.iter()).zip(k2.iter()) {
            *y = xi + k * (0.5 * h);
        }
        l.apply_into(t + 0.5 * h, tmp, k3, exec);
        for ((y, &xi), &k) in tmp.iter_mut().zip(x.iter()).zip(k3.iter()) {
            *y = xi + k * h;
        }
        l.apply_into(t + h, tmp, k4, exec);
        let w = h / 6.0;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    pub exec: Execution,
    pub tolerances: Tolerances,
    /// Keep every state in the returned trajectory. Observables are always kept.
    pub keep_states: bool,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            exec: Execution::default(),
            tolerances: Tolerances::TRAJECTORY,
            keep_states: true,
        }
    }
}

/// Fixed-step RK4 on the vectorized state, recording every grid point.
pub fn propagate(
    spec: &LiouvillianSpec,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    observables: &[(String, CMatrix)],
) -> Result<Trajectory> {
    propagate_with(spec, rho0, grid, observables, PropagateOptions::default(), |_, _, _| Ok(()))
}

/// As [`propagate`], additionally handing each validated state to `observer`
/// as `(index, time, state)`.
pub fn propagate_with<F>(
    spec: &LiouvillianSpec,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    observables: &[(String, CMatrix)],
    opts: PropagateOptions,
    mut observer: F,
) -> Result<Trajectory>
where
    F: FnMut(usize, f64, &DensityMatrix) -> Result<()>,
{
    let d = spec.hilbert_dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "propagate initial state",
            expected: d,
            found: rho0.dim(),
        });
    }
    for (name, op) in observables {
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::InvalidParameter(format!(
                "observable {name} is {}x{}, state dimension is {d}",
                op.nrows(),
                op.ncols()
            )));
        }
    }
    let compiled = CompiledLiouvillian::new(spec);
    let mut rk = Rk4::new(d * d);
    let mut x = rho0.vectorize().to_vec();
    let h = grid.dt();

    let mut traj = Trajectory {
        times: Vec::with_capacity(grid.steps() + 1),
        states: Vec::new(),
        observables: observables
            .iter()
            .map(|(name, _)| (name.clone(), Vec::with_capacity(grid.steps() + 1)))
            .collect::<BTreeMap<_, _>>(),
        max_trace_error: 0.0,
    };

    for n in 0..=grid.steps() {
        let t = grid.time(n);
        if n > 0 {
            rk.step(&compiled, grid.time(n - 1), h, &mut x, opts.exec);
        }
        let mat = devectorize(&Array1::from(x.clone()), d)?;
        let state = DensityMatrix::with_tolerances(mat, opts.tolerances).map_err(|e| Error::ValidationFailed {
            time: t,
            reason: e.to_string(),
        })?;
        let tr = crate::linalg::trace(state.matrix());
        traj.max_trace_error = traj.max_trace_error.max((tr - ONE).norm());
        for (name, op) in observables {
            let value = expectation_matrix(op, state.matrix())?;
            traj.observables.get_mut(name).expect("registered above").push(value);
        }
        observer(n, t, &state)?;
        traj.times.push(t);
        if opts.keep_states {
            traj.states.push(state);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matrix_unit, real_diag};
    use crate::liouvillian::{assemble_static, LindbladTerm, Part};
    use crate::superop::SuperOperator;

    fn sigma_x() -> CMatrix {
        matrix_unit(2, 0, 1) + matrix_unit(2, 1, 0)
    }

    #[test]
    fn zero_liouvillian_keeps_state() {
        let spec = LiouvillianSpec::new(2).with_static(Part::System, SuperOperator::zeros(2)).unwrap();
        let rho0 = DensityMatrix::pure(&[C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let traj = propagate(&spec, &rho0, &TimeGrid::new(0.0, 3.0, 30).unwrap(), &[]).unwrap();
        assert_eq!(traj.len(), 31);
        for s in &traj.states {
            assert_eq!(s.matrix(), rho0.matrix());
        }
    }

    #[test]
    fn rabi_oscillation() {
        let omega = 1.7;
        let h = sigma_x().mapv(|z| z * (omega / 2.0));
        let spec = LiouvillianSpec::new(2).with_static(Part::System, assemble_static(&h, &[]).unwrap()).unwrap();
        let rho0 = DensityMatrix::basis(2, 0).unwrap();
        let grid = TimeGrid::new(0.0, 4.0 * std::f64::consts::PI / omega, 4000).unwrap();
        let obs = vec![("excited".to_string(), real_diag(&[0.0, 1.0]))];
        let traj = propagate(&spec, &rho0, &grid, &obs).unwrap();
        for (t, p) in traj.times.iter().zip(traj.observable("excited").unwrap()) {
            let expected = (omega * t / 2.0).sin().powi(2);
            assert!((p.re - expected).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn exponential_decay() {
        let gamma = 0.7;
        let l = assemble_static(&CMatrix::zeros((2, 2)), &[LindbladTerm::new(matrix_unit(2, 0, 1), gamma).unwrap()]).unwrap();
        let spec = LiouvillianSpec::new(2).with_static(Part::System, l).unwrap();
        let rho0 = DensityMatrix::basis(2, 1).unwrap();
        let grid = TimeGrid::new(0.0, 5.0, 4000).unwrap();
        let obs = vec![("n".to_string(), real_diag(&[0.0, 1.0]))];
        let traj = propagate(&spec, &rho0, &grid, &obs).unwrap();
        for (t, p) in traj.times.iter().zip(traj.observable("n").unwrap()) {
            assert!((p.re - (-gamma * t).exp()).abs() < 1e-8);
        }
        assert!(traj.max_trace_error < 1e-12);
    }

    #[test]
    fn oscillating_drive_matches_static_equivalent() {
        // e^{iωt} S + e^{-iωt} S with S = -i[σx/2, ·] is a cos drive
        let s = assemble_static(&sigma_x().mapv(|z| z * 0.25), &[]).unwrap();
        let spec = LiouvillianSpec::new(2)
            .with_piece(Part::Interaction, s.clone(), 0.0)
            .unwrap()
            .with_piece(Part::Interaction, s, 0.0)
            .unwrap();
        let reference = LiouvillianSpec::new(2)
            .with_static(Part::System, assemble_static(&sigma_x().mapv(|z| z * 0.5), &[]).unwrap())
            .unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 200).unwrap();
        let rho0 = DensityMatrix::basis(2, 0).unwrap();
        let a = propagate(&spec, &rho0, &grid, &[]).unwrap();
        let b = propagate(&reference, &rho0, &grid, &[]).unwrap();
        let diff = a.last_state().unwrap().matrix() - b.last_state().unwrap().matrix();
        assert!(crate::linalg::max_abs(&diff) < 1e-14);
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let spec = LiouvillianSpec::new(3);
        let rho0 = DensityMatrix::basis(2, 0).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        assert!(matches!(propagate(&spec, &rho0, &grid, &[]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn reports_validation_time() {
        // not a valid generator: pumps trace
        let bad = SuperOperator::identity(2);
        let spec = LiouvillianSpec::new(2).with_static(Part::Unlabeled, bad).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let err = propagate(&spec, &DensityMatrix::basis(2, 0).unwrap(), &grid, &[]).unwrap_err();
        match err {
            Error::ValidationFailed { time, .. } => assert!((time - 0.1).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
