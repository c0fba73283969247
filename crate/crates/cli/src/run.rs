//! Full-versus-reduced comparison for one scenario.

use std::collections::BTreeMap;

use ndarray::s;
use num_complex::Complex64 as C64;
use serde::Serialize;

use projector_core::dynamics::{nz_consistency, propagate_with, steady_state, PropagateOptions, TimeGrid};
use projector_core::linalg::dagger;
use projector_core::liouvillian::{assemble_static, build_projector, check_structure, LindbladTerm, LiouvillianSpec, Part};
use projector_core::models::{build_lambda, build_optomech, fock_annihilation, number_operator, thermal_state, RandomBipartite};
use projector_core::reductions::{
    adequate_cutoff, cooperativity, sideband_generator_on, sideband_rates, steady_occupation, truncation_bias,
};
use projector_core::superop::{
    commutator_superop, expectation_matrix, partial_trace, trace_distance_matrix, CMatrix, DensityMatrix,
    SuperOperator,
};

use crate::error::{CliError, CliResult};
use crate::scenario::{Initial, Metric, ModelParams, Observable, Scenario};

/// Truncation bias allowed for the reduced steady state.
pub const REDUCED_CUTOFF_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSummary {
    pub gamma_h: f64,
    pub gamma_c: f64,
    pub delta_m: f64,
    pub cooperativity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationSummary {
    /// `(γ_m n̄ + Γ_h) / (γ_m + Γ_c − Γ_h)`.
    pub formula: f64,
    pub reduced_steady: Option<f64>,
    pub reduced_cutoff: Option<usize>,
    pub reduced_truncation_bias: Option<f64>,
    /// Mechanical occupation of the full model's steady state.
    pub full_steady: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalValue {
    pub full: [f64; 2],
    pub reduced: [f64; 2],
}

/// Contents of `<name>_summary.json`. Every key is always present; entries
/// that do not apply to the model are `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub model: String,
    pub seed: Option<u64>,
    pub grid: GridSummary,
    pub reduced_method: String,
    pub rates: Option<RateSummary>,
    pub occupation: Option<OccupationSummary>,
    pub max_excited_population: Option<f64>,
    pub max_trace_distance: f64,
    pub max_observable_error: BTreeMap<String, f64>,
    pub final_observables: BTreeMap<String, FinalValue>,
    pub structure: BTreeMap<String, f64>,
    pub structure_max_residual: f64,
    pub nz_max_residual: Option<f64>,
    pub full_max_trace_error: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ObservableSeries {
    pub observable: Observable,
    pub full: Vec<C64>,
    pub reduced: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub times: Vec<f64>,
    pub series: Vec<ObservableSeries>,
    pub trace_distance: Vec<f64>,
    pub summary: RunSummary,
}

/// Maps a propagated state at time `t` into the comparison space.
type Projection<'a> = Box<dyn Fn(f64, &DensityMatrix) -> CliResult<CMatrix> + 'a>;

struct Problem<'a> {
    full_spec: LiouvillianSpec,
    full_rho0: DensityMatrix,
    full_to_cmp: Projection<'a>,
    reduced_spec: LiouvillianSpec,
    reduced_rho0: DensityMatrix,
    reduced_to_cmp: Projection<'a>,
    /// Levels of the system ladder, and the comparison dimension.
    levels: usize,
    cmp_dim: usize,
    method: String,
    structure: BTreeMap<String, f64>,
    structure_max: f64,
    nz: Option<f64>,
    rates: Option<RateSummary>,
    occupation: Option<OccupationSummary>,
    warnings: Vec<String>,
}

fn initial_system(initial: &Initial, levels: usize) -> CliResult<DensityMatrix> {
    Ok(match initial {
        Initial::Ground => DensityMatrix::basis(levels, 0)?,
        Initial::Thermal(nbar) => thermal_state(levels, *nbar)?,
        Initial::Pure(c) => DensityMatrix::pure(&c.iter().map(|&z| z.into()).collect::<Vec<C64>>())?,
    })
}

fn observable_matrix(obs: Observable, levels: usize, dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros((dim, dim));
    match obs {
        Observable::Occupation => {
            for k in 0..levels {
                m[[k, k]] = C64::new(k as f64, 0.0);
            }
        }
        Observable::Position => {
            for k in 0..levels - 1 {
                let x = C64::new(((k + 1) as f64).sqrt(), 0.0);
                m[[k, k + 1]] = x;
                m[[k + 1, k]] = x;
            }
        }
        Observable::Coherence => m[[1, 0]] = C64::new(1.0, 0.0),
        Observable::ExcitedPopulation => {
            for k in levels..dim {
                m[[k, k]] = C64::new(1.0, 0.0);
            }
        }
    }
    m
}

fn unlabeled(s: SuperOperator) -> CliResult<LiouvillianSpec> {
    Ok(LiouvillianSpec::new(s.hilbert_dim()).with_static(Part::Unlabeled, s)?)
}

fn structure_of(spec: &LiouvillianSpec, proj: &projector_core::liouvillian::ProjectorPair) -> CliResult<(BTreeMap<String, f64>, f64)> {
    let rep = check_structure(spec, proj)?;
    let named = rep.named().iter().map(|(k, v)| (k.to_string(), *v)).collect();
    Ok((named, rep.max_residual()))
}

fn lambda_problem(sc: &Scenario, p: &projector_core::reductions::LambdaParams) -> CliResult<Problem<'static>> {
    let model = build_lambda(p)?;
    let rho_s = initial_system(&sc.initial, 2)?;
    let mut padded = CMatrix::zeros((3, 3));
    padded.slice_mut(s![..2, ..2]).assign(rho_s.matrix());
    let full_rho0 = DensityMatrix::new(padded.clone())?;

    let reduced = model.reduced_generator()?;
    let method = reduced.method.to_string();
    let mut warnings = reduced.warnings.clone();
    let reduced_l = reduced.with_added(&commutator_superop(&model.h_s)?)?;

    let embedded = model.embedded_spec()?;
    let proj = build_projector(&model.bath_state, &model.space)?;
    let (structure, structure_max) = structure_of(&embedded, &proj)?;
    let nz = if sc.wants(Metric::NzResidual) {
        let rho_emb = DensityMatrix::new(padded)?;
        Some(nz_consistency(&embedded, &proj, &rho_emb, &sc.grid)?.max_residual)
    } else {
        None
    };
    warnings.sort();
    warnings.dedup();
    Ok(Problem {
        full_spec: model.full_spec()?,
        full_rho0,
        full_to_cmp: Box::new(|_, rho| Ok(rho.matrix().clone())),
        reduced_spec: unlabeled(reduced_l)?,
        reduced_rho0: rho_s,
        reduced_to_cmp: Box::new(|_, rho| {
            let mut m = CMatrix::zeros((3, 3));
            m.slice_mut(s![..2, ..2]).assign(rho.matrix());
            Ok(m)
        }),
        levels: 2,
        cmp_dim: 3,
        method,
        structure,
        structure_max,
        nz,
        rates: None,
        occupation: None,
        warnings,
    })
}

fn optomech_problem(sc: &Scenario, p: &projector_core::reductions::OptomechParams) -> CliResult<Problem<'static>> {
    let model = build_optomech(p)?;
    let nm = p.n_mech;
    let rho_m = initial_system(&sc.initial, nm)?;
    let full_rho0 = rho_m.tensor(&model.bath_state);

    let born = model.born_generator()?;
    let method = born.method.to_string();
    let mut warnings = model.warnings.clone();
    warnings.extend(born.warnings.iter().cloned());
    let b = fock_annihilation(nm)?;
    let damping = assemble_static(
        &CMatrix::zeros((nm, nm)),
        &[
            LindbladTerm::new(dagger(&b), p.gamma_m * p.nbar)?,
            LindbladTerm::new(b, p.gamma_m * (p.nbar + 1.0))?,
        ],
    )?;
    let reduced_l = born.with_added(&damping)?;

    let proj = build_projector(&model.bath_state, &model.space)?;
    let (structure, structure_max) = structure_of(&model.spec_schrodinger, &proj)?;

    let r = sideband_rates(p);
    let rates = RateSummary {
        gamma_h: r.gamma_h,
        gamma_c: r.gamma_c,
        delta_m: r.delta_m,
        cooperativity: cooperativity(p).ok(),
    };
    let occupation = match steady_occupation(p) {
        Ok(formula) => {
            let mut occ = OccupationSummary {
                formula,
                reduced_steady: None,
                reduced_cutoff: None,
                reduced_truncation_bias: None,
                full_steady: None,
            };
            if sc.wants(Metric::SteadyState) {
                let n = adequate_cutoff(p, REDUCED_CUTOFF_TOL)?;
                let gen = sideband_generator_on(p, n)?;
                let ss = steady_state(&gen.generator)?;
                occ.reduced_steady = Some(expectation_matrix(&number_operator(n)?, ss.matrix())?.re);
                occ.reduced_cutoff = Some(n);
                occ.reduced_truncation_bias = Some(truncation_bias(p, n));
                let full = steady_state(model.spec_schrodinger.static_part())?;
                let mech = partial_trace(&full, &model.space, 0)?;
                occ.full_steady = Some(expectation_matrix(&number_operator(nm)?, mech.matrix())?.re);
            }
            Some(occ)
        }
        Err(e) => {
            warnings.push(e.to_string());
            None
        }
    };

    let space = model.space.clone();
    let omega_m = p.omega_m;
    let rotation = move |t: f64| {
        let mut u = CMatrix::zeros((nm, nm));
        for k in 0..nm {
            u[[k, k]] = C64::from_polar(1.0, -omega_m * k as f64 * t);
        }
        u
    };
    warnings.sort();
    warnings.dedup();
    Ok(Problem {
        full_spec: model.spec_schrodinger,
        full_rho0,
        full_to_cmp: Box::new(move |_, rho| Ok(partial_trace(rho, &space, 0)?.into_matrix())),
        reduced_spec: unlabeled(reduced_l)?,
        reduced_rho0: rho_m,
        reduced_to_cmp: Box::new(move |t, rho| {
            let u = rotation(t);
            Ok(u.dot(rho.matrix()).dot(&dagger(&u)))
        }),
        levels: nm,
        cmp_dim: nm,
        method,
        structure,
        structure_max,
        nz: None,
        rates: Some(rates),
        occupation,
        warnings,
    })
}

fn random_problem(sc: &Scenario, coupling: f64) -> CliResult<Problem<'static>> {
    let seed = sc.seed.ok_or_else(|| CliError::Invalid("seed is required for random_bipartite".into()))?;
    let model = RandomBipartite::generate(seed, coupling)?;
    let rho_s = initial_system(&sc.initial, 2)?;
    let full_rho0 = rho_s.tensor(&model.bath_state);
    let spec = model.spec()?;
    let proj = build_projector(&model.bath_state, &model.space)?;
    let (structure, structure_max) = structure_of(&spec, &proj)?;
    let nz = if sc.wants(Metric::NzResidual) {
        Some(nz_consistency(&spec, &proj, &rho_s, &sc.grid)?.max_residual)
    } else {
        None
    };
    let born = model.born_generator(false)?;
    let method = born.method.to_string();
    let warnings = born.warnings.clone();
    let reduced_l = model.reduced_liouvillian(false)?;
    let space = model.space.clone();
    Ok(Problem {
        full_spec: spec,
        full_rho0,
        full_to_cmp: Box::new(move |_, rho| Ok(partial_trace(rho, &space, 0)?.into_matrix())),
        reduced_spec: unlabeled(reduced_l)?,
        reduced_rho0: rho_s,
        reduced_to_cmp: Box::new(|_, rho| Ok(rho.matrix().clone())),
        levels: 2,
        cmp_dim: 2,
        method,
        structure,
        structure_max,
        nz,
        rates: None,
        occupation: None,
        warnings,
    })
}

fn collect(
    spec: &LiouvillianSpec,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    to_cmp: &Projection<'_>,
) -> CliResult<(Vec<CMatrix>, f64)> {
    let mut states = Vec::with_capacity(grid.steps() + 1);
    let opts = PropagateOptions {
        keep_states: false,
        ..Default::default()
    };
    let mut failure = None;
    let traj = propagate_with(spec, rho0, grid, &[], opts, |_, t, rho| {
        match to_cmp(t, rho) {
            Ok(m) => states.push(m),
            Err(e) => failure = Some(e),
        }
        Ok(())
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((states, traj.max_trace_error))
}

/// Runs the scenario in memory.
pub fn run(sc: &Scenario) -> CliResult<RunOutput> {
    run_inner(sc).map_err(|e| e.context(&sc.name))
}

fn run_inner(sc: &Scenario) -> CliResult<RunOutput> {
    let problem = match &sc.params {
        ModelParams::Lambda(p) => lambda_problem(sc, p)?,
        ModelParams::Optomech(p) => optomech_problem(sc, p)?,
        ModelParams::RandomBipartite(p) => random_problem(sc, p.coupling)?,
    };
    let (full, full_trace_error) = collect(&problem.full_spec, &problem.full_rho0, &sc.grid, &problem.full_to_cmp)?;
    let (reduced, _) = collect(&problem.reduced_spec, &problem.reduced_rho0, &sc.grid, &problem.reduced_to_cmp)?;

    let trace_distance = full
        .iter()
        .zip(&reduced)
        .map(|(f, r)| trace_distance_matrix(f, r))
        .collect::<projector_core::Result<Vec<f64>>>()?;

    let mut series = Vec::new();
    let mut max_observable_error = BTreeMap::new();
    let mut final_observables = BTreeMap::new();
    for &obs in &sc.observables {
        let op = observable_matrix(obs, problem.levels, problem.cmp_dim);
        let eval = |states: &[CMatrix]| {
            states
                .iter()
                .map(|m| expectation_matrix(&op, m))
                .collect::<projector_core::Result<Vec<C64>>>()
        };
        let f = eval(&full)?;
        let r = eval(&reduced)?;
        let err = f.iter().zip(&r).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        max_observable_error.insert(obs.as_str().to_string(), err);
        let (lf, lr) = (f[f.len() - 1], r[r.len() - 1]);
        final_observables.insert(
            obs.as_str().to_string(),
            FinalValue {
                full: [lf.re, lf.im],
                reduced: [lr.re, lr.im],
            },
        );
        series.push(ObservableSeries {
            observable: obs,
            full: f,
            reduced: r,
        });
    }

    let max_excited_population = matches!(sc.params, ModelParams::Lambda(_)).then(|| {
        full.iter().map(|m| m[[2, 2]].re).fold(0.0, f64::max)
    });

    let summary = RunSummary {
        name: sc.name.clone(),
        model: sc.model.as_str().to_string(),
        seed: sc.seed,
        grid: GridSummary {
            t0: sc.grid.t0(),
            t1: sc.grid.t1(),
            steps: sc.grid.steps(),
        },
        reduced_method: problem.method,
        rates: problem.rates,
        occupation: problem.occupation,
        max_excited_population,
        max_trace_distance: trace_distance.iter().cloned().fold(0.0, f64::max),
        max_observable_error,
        final_observables,
        structure: problem.structure,
        structure_max_residual: problem.structure_max,
        nz_max_residual: problem.nz,
        full_max_trace_error: full_trace_error,
        warnings: problem.warnings,
    };
    check_finite(&summary)?;
    Ok(RunOutput {
        times: sc.grid.times(),
        series,
        trace_distance,
        summary,
    })
}

fn check_finite(s: &RunSummary) -> CliResult<()> {
    let mut raw = vec![s.max_trace_distance, s.structure_max_residual, s.full_max_trace_error];
    raw.extend(s.max_observable_error.values());
    raw.extend(s.structure.values());
    raw.extend(s.final_observables.values().flat_map(|v| v.full.into_iter().chain(v.reduced)));
    raw.extend(s.nz_max_residual);
    raw.extend(s.max_excited_population);
    if let Some(r) = &s.rates {
        raw.extend([r.gamma_h, r.gamma_c, r.delta_m]);
        raw.extend(r.cooperativity);
    }
    if let Some(o) = &s.occupation {
        raw.push(o.formula);
        raw.extend(o.reduced_steady);
        raw.extend(o.reduced_truncation_bias);
        raw.extend(o.full_steady);
    }
    if raw.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Numerical("summary contains non-finite values".into()));
    }
    Ok(())
}
