//! Checks `Qρ(t) = G(t) ∫₀ᵗ G⁻¹(s) Q L(s) P ρ(s) ds` with `Ġ = Q L(t) G`,
//! `G(0) = I`, for a product initial state.

use ndarray::Array1;
use ndarray_linalg::{FactorizeInto, Solve};
use num_complex::Complex64 as C64;

use super::TimeGrid;
use crate::error::{Error, Result};
use crate::linalg::{condition_number, identity, ZERO};
use crate::liouvillian::{LiouvillianSpec, ProjectorPair};
use crate::superop::{CMatrix, DensityMatrix};

const MAX_CONDITION: f64 = 1e12;

/// Quadrature rule for the memory integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Plain trapezoid, second order.
    Trapezoid,
    /// Trapezoid plus the endpoint-derivative (Euler–Maclaurin) correction,
    /// fourth order like the integrator.
    CorrectedTrapezoid,
    /// The integral carried as an extra RK4 unknown `u̇ = G⁻¹ Q L P ρ`.
    #[default]
    RungeKutta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NzReport {
    pub times: Vec<f64>,
    /// `max |Qρ(t) − w(t)|` at each grid point.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub max_condition: f64,
}

impl NzReport {
    pub fn initial_residual(&self) -> f64 {
        self.residuals[0]
    }
}

pub fn nz_consistency(
    spec: &LiouvillianSpec,
    proj: &ProjectorPair,
    rho_s0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<NzReport> {
    nz_consistency_with(spec, proj, rho_s0, grid, Quadrature::default())
}

fn rk4_matrix<F: Fn(f64, &CMatrix) -> Result<CMatrix>>(f: F, t: f64, h: f64, y: &CMatrix) -> Result<CMatrix> {
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &(y + &k1.mapv(|z| z * (0.5 * h))))?;
    let k3 = f(t + 0.5 * h, &(y + &k2.mapv(|z| z * (0.5 * h))))?;
    let k4 = f(t + h, &(y + &k3.mapv(|z| z * h)))?;
    Ok(y + &((k1 + (k2 + k3).mapv(|z| z * 2.0) + k4).mapv(|z| z * (h / 6.0))))
}

pub fn nz_consistency_with(
    spec: &LiouvillianSpec,
    proj: &ProjectorPair,
    rho_s0: &DensityMatrix,
    grid: &TimeGrid,
    quadrature: Quadrature,
) -> Result<NzReport> {
    let d = spec.hilbert_dim();
    if proj.space.total_dim() != d {
        return Err(Error::DimensionMismatch {
            context: "nz_consistency projector",
            expected: d,
            found: proj.space.total_dim(),
        });
    }
    if rho_s0.dim() != proj.space.system_dim() {
        return Err(Error::DimensionMismatch {
            context: "nz_consistency initial system state",
            expected: proj.space.system_dim(),
            found: rho_s0.dim(),
        });
    }
    let dd = d * d;
    let p = proj.p.matrix();
    let q = proj.q.matrix();
    let l_at = |t: f64| spec.evaluate_at(t).into_matrix();

    // ρ, G and (for the RK4 rule) the running integral advance together as
    // the columns of one block [ρ | G | u]
    let mut state = CMatrix::zeros((dd, dd + 2));
    state
        .column_mut(0)
        .assign(&rho_s0.tensor(&proj.bath_state).vectorize());
    state.slice_mut(ndarray::s![.., 1..=dd]).assign(&identity(dd));
    let rhs = |t: f64, y: &CMatrix| -> Result<CMatrix> {
        let l = l_at(t);
        let ql = q.dot(&l);
        let mut out = CMatrix::zeros((dd, dd + 2));
        out.column_mut(0).assign(&l.dot(&y.column(0)));
        let g = y.slice(ndarray::s![.., 1..=dd]);
        out.slice_mut(ndarray::s![.., 1..=dd]).assign(&ql.dot(&g));
        if quadrature == Quadrature::RungeKutta {
            let lu = g.to_owned().factorize_into()?;
            out.column_mut(dd + 1).assign(&lu.solve(&ql.dot(&p.dot(&y.column(0))))?);
        }
        Ok(out)
    };

    let integrand = |t: f64, y: &CMatrix| -> Result<(Array1<C64>, Array1<C64>, f64)> {
        let rho = y.column(0).to_owned();
        let g = y.slice(ndarray::s![.., 1..=dd]).to_owned();
        let cond = condition_number(&g)?;
        if !(cond <= MAX_CONDITION) {
            return Err(Error::IllConditionedPropagator { time: t, condition: cond });
        }
        let l = l_at(t);
        let v = p.dot(&rho);
        let lv = l.dot(&v);
        let lu = g.factorize_into()?;
        let f = lu.solve(&q.dot(&lv))?;
        let df = match quadrature {
            Quadrature::Trapezoid | Quadrature::RungeKutta => Array1::zeros(dd),
            Quadrature::CorrectedTrapezoid => {
                let ldot = spec.derivative_at(t).into_matrix();
                let inner = -l.dot(&q.dot(&lv)) + ldot.dot(&v) + l.dot(&p.dot(&l.dot(&rho)));
                lu.solve(&q.dot(&inner))?
            }
        };
        Ok((f, df, cond))
    };

    let h = grid.dt();
    let mut times = Vec::with_capacity(grid.steps() + 1);
    let mut residuals = Vec::with_capacity(grid.steps() + 1);
    let mut max_condition: f64 = 1.0;
    let mut u: Array1<C64> = Array1::from_elem(dd, ZERO);
    let (mut f_prev, mut df_prev, _) = integrand(grid.t0(), &state)?;

    times.push(grid.t0());
    residuals.push(residual(&state, q, &u, dd));
    for n in 1..=grid.steps() {
        let t_prev = grid.time(n - 1);
        let t = grid.time(n);
        state = rk4_matrix(rhs, t_prev, h, &state)?;
        let (f, df, cond) = integrand(t, &state)?;
        max_condition = max_condition.max(cond);
        if quadrature == Quadrature::RungeKutta {
            u = state.column(dd + 1).to_owned();
        } else {
            u = u + (&f_prev + &f).mapv(|z| z * (0.5 * h)) + (&df_prev - &df).mapv(|z| z * (h * h / 12.0));
        }
        times.push(t);
        residuals.push(residual(&state, q, &u, dd));
        f_prev = f;
        df_prev = df;
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(NzReport {
        times,
        residuals,
        max_residual,
        max_condition,
    })
}

fn residual(state: &CMatrix, q: &CMatrix, u: &Array1<C64>, dd: usize) -> f64 {
    let rho = state.column(0);
    let g = state.slice(ndarray::s![.., 1..=dd]);
    let qrho = q.dot(&rho);
    let w = g.dot(u);
    (qrho - w).iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::build_projector;
    use crate::models::RandomBipartite;

    #[test]
    fn no_interaction_means_no_correlations() {
        let model = RandomBipartite::generate(4, 1.0).unwrap();
        let spec = model.free_spec().unwrap();
        let proj = build_projector(&model.bath_state, &model.space).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let rep = nz_consistency(&spec, &proj, &model.system_state, &grid).unwrap();
        assert!(rep.max_residual < 1e-12, "{}", rep.max_residual);
    }

    #[test]
    fn initial_residual_is_zero_and_orders_differ() {
        let model = RandomBipartite::generate(5, 1.0).unwrap();
        let spec = model.spec().unwrap();
        let proj = build_projector(&model.bath_state, &model.space).unwrap();
        let coarse = TimeGrid::new(0.0, 2.0, 200).unwrap();
        let fine = coarse.refined();
        let trap = |g: &TimeGrid| {
            nz_consistency_with(&spec, &proj, &model.system_state, g, Quadrature::Trapezoid)
                .unwrap()
                .max_residual
        };
        let rk = |g: &TimeGrid| nz_consistency(&spec, &proj, &model.system_state, g).unwrap();
        let corr = |g: &TimeGrid| {
            nz_consistency_with(&spec, &proj, &model.system_state, g, Quadrature::CorrectedTrapezoid)
                .unwrap()
                .max_residual
        };
        let r0 = rk(&coarse);
        assert!(r0.initial_residual() < 1e-15);
        let trap_ratio = trap(&coarse) / trap(&fine);
        let rk_ratio = r0.max_residual / rk(&fine).max_residual;
        let corr_ratio = corr(&coarse) / corr(&fine);
        assert!(trap_ratio > 3.5 && trap_ratio < 4.5, "{trap_ratio}");
        assert!(rk_ratio > 12.0, "{rk_ratio}");
        assert!(corr_ratio > 12.0, "{corr_ratio}");
    }
}
