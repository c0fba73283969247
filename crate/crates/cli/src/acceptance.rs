//! Built-in acceptance suite. Each criterion reports pass/fail, a detail
//! line and its wall time; runtime budgets are part of the verdict.

use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use projector_core::dynamics::{nz_consistency, propagate_with, PropagateOptions, TimeGrid};
use projector_core::linalg::max_abs;
use projector_core::liouvillian::{build_projector, check_structure, LiouvillianSpec, Part};
use projector_core::models::{build_lambda, build_optomech, RandomBipartite};
use projector_core::reductions::{
    lambda_effective_hamiltonian, sideband_rates, sideband_spectral, LambdaParams, OptomechParams, Sideband,
};
use projector_core::superop::{commutator_superop, partial_trace, trace_distance_matrix, CMatrix};

use crate::error::{CliError, CliResult};
use crate::output::write_run;
use crate::run::{run, RunOutput};
use crate::scenario::parse_scenario;

pub const COOLING_SCENARIO: &str = include_str!("../../../scenarios/cooling.json");
pub const LAMBDA_SCENARIO: &str = include_str!("../../../scenarios/lambda.json");

/// Criteria whose failure is understood and recorded in the project's
/// decisions log; they still print FAIL.
pub const KNOWN_RED: [u32; 2] = [5, 7];

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl Outcome {
    pub fn known_red(&self) -> bool {
        KNOWN_RED.contains(&self.id)
    }

    pub fn line(&self) -> String {
        let verdict = match (self.pass, self.known_red()) {
            (true, _) => "PASS".to_string(),
            (false, true) => "FAIL (known, see decisions log)".to_string(),
            (false, false) => "FAIL".to_string(),
        };
        format!(
            "criterion {} [{}] {verdict}: {} ({:.2}s)",
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

fn timed<F>(id: u32, title: &'static str, budget: Option<Duration>, f: F) -> Outcome
where
    F: FnOnce() -> CliResult<(bool, String)>,
{
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let (mut pass, mut detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(b) = budget {
        if elapsed > b {
            pass = false;
            detail.push_str(&format!("; over the {:.0}s budget", b.as_secs_f64()));
        }
    }
    Outcome {
        id,
        title,
        pass,
        detail,
        elapsed,
        budget,
    }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn cooling_params() -> OptomechParams {
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

pub fn projector_identities() -> CliResult<(bool, String)> {
    let lambda = build_lambda(&LambdaParams {
        omega_a: C64::new(1.0, 0.0),
        omega_b: C64::new(1.0, 0.0),
        delta: 0.0,
        bigdelta: 50.0,
    })?;
    let proj = build_projector(&lambda.bath_state, &lambda.space)?;
    let r_lambda = check_structure(&lambda.embedded_spec()?, &proj)?.max_residual();
    let opto = build_optomech(&cooling_params())?;
    let proj = build_projector(&opto.bath_state, &opto.space)?;
    let r_opto = check_structure(&opto.spec_schrodinger, &proj)?.max_residual();
    let worst = r_lambda.max(r_opto);
    Ok((worst < 1e-12, format!("max residual lambda {r_lambda:.2e}, optomech {r_opto:.2e}")))
}

pub fn nz_convergence() -> CliResult<(bool, String)> {
    let m = RandomBipartite::generate(0, 1.0)?;
    let spec = m.spec()?;
    let proj = build_projector(&m.bath_state, &m.space)?;
    let grid = TimeGrid::new(0.0, 2.0, 2000)?;
    let coarse = nz_consistency(&spec, &proj, &m.system_state, &grid)?.max_residual;
    let fine = nz_consistency(&spec, &proj, &m.system_state, &grid.refined())?.max_residual;
    let ratio = coarse / fine;
    Ok((
        coarse <= 1e-5 && ratio >= 12.0,
        format!("residual {coarse:.3e} at 2000 steps, {fine:.3e} at 4000, ratio {ratio:.2}"),
    ))
}

pub fn lambda_elimination(out: &RunOutput) -> (bool, String) {
    let s = &out.summary;
    let err = s.max_observable_error.get("occupation").copied().unwrap_or(f64::INFINITY);
    let excited = s.max_excited_population.unwrap_or(f64::INFINITY);
    (
        err <= 0.02 && excited <= 1e-3,
        format!("max |P_b full - P_b reduced| {err:.3e}, max excited population {excited:.4e}"),
    )
}

pub fn lambda_closed_form() -> CliResult<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = LambdaParams {
            omega_a: C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            omega_b: C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            delta: rng.random_range(-1.0..1.0),
            bigdelta: rng.random_range(20.0..100.0) * if rng.random::<bool>() { 1.0 } else { -1.0 },
        };
        let model = build_lambda(&p)?;
        let generator = model.reduced_generator()?.generator;
        let h_eff = lambda_effective_hamiltonian(&p)? - &model.h_s;
        let closed = commutator_superop(&h_eff)?;
        worst = worst.max(max_abs(&(generator.matrix() - closed.matrix())));
    }
    Ok((worst <= 1e-10, format!("max entrywise difference {worst:.2e} over 20 draws")))
}

pub fn sideband_checks() -> CliResult<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);

    let mut resonant: f64 = 0.0;
    for _ in 0..50 {
        let omega_m = rng.random_range(1.0..50.0);
        let p = OptomechParams {
            omega_m,
            delta: omega_m,
            kappa: rng.random_range(0.01..5.0),
            g: C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            ..cooling_params()
        };
        let expected = 4.0 * p.g.norm_sqr() / p.kappa;
        let from_spectral = 2.0 * p.g.norm_sqr() * sideband_spectral(p.delta, p.kappa, omega_m, Sideband::Minus).re;
        for got in [sideband_rates(&p).gamma_c, from_spectral] {
            resonant = resonant.max((got - expected).abs() / expected);
        }
    }

    let mut literal: f64 = 0.0;
    let mut reflected: f64 = 0.0;
    for _ in 0..50 {
        let delta = rng.random_range(-20.0..20.0);
        let kappa = rng.random_range(0.01..5.0);
        let w = rng.random_range(-20.0..20.0);
        let plus = sideband_spectral(delta, kappa, w, Sideband::Plus);
        let minus_reflected = sideband_spectral(delta, kappa, -w, Sideband::Minus);
        literal = literal.max((plus - minus_reflected.conj()).norm() / plus.norm());
        reflected = reflected.max((plus - minus_reflected).norm() / plus.norm());
    }

    let p = OptomechParams {
        omega_m: 20.0,
        delta: 20.0,
        kappa: 1.0,
        ..cooling_params()
    };
    let r = sideband_rates(&p);
    let x = p.kappa / (4.0 * p.omega_m);
    let expected_ratio = x * x / (1.0 + x * x);
    let ratio_err = (r.gamma_h / r.gamma_c - expected_ratio).abs() / expected_ratio;

    let pass = resonant < 1e-12 && literal < 1e-12 && ratio_err <= 1e-3;
    Ok((
        pass,
        format!(
            "resonant Gamma_c rel. error {resonant:.1e}; E+(w) vs conj E-(-w) max rel. diff {literal:.3e} \
             (E+(w) vs E-(-w): {reflected:.1e}); Gamma_h/Gamma_c rel. error {ratio_err:.1e}"
        ),
    ))
}

pub fn cooling(out: &RunOutput) -> (bool, String) {
    let Some(occ) = &out.summary.occupation else {
        return (false, "no occupation summary".into());
    };
    let (Some(reduced), Some(full)) = (occ.reduced_steady, occ.full_steady) else {
        return (false, "steady states missing from the summary".into());
    };
    let formula_ok = (occ.formula - 0.910).abs() < 5e-4;
    let reduced_err = (reduced - occ.formula).abs();
    let full_rel = (full - occ.formula).abs() / occ.formula;
    (
        formula_ok && reduced_err <= 1e-6 && full_rel <= 0.10,
        format!(
            "formula {:.6}; reduced steady {reduced:.9} (cutoff {}, diff {reduced_err:.2e}); full steady {full:.6} (rel. diff {:.2}%)",
            occ.formula,
            occ.reduced_cutoff.unwrap_or(0),
            100.0 * full_rel
        ),
    )
}

fn weak_coupling_error(m: &RandomBipartite, grid: &TimeGrid) -> CliResult<f64> {
    let opts = PropagateOptions {
        keep_states: false,
        ..Default::default()
    };
    let mut full = Vec::with_capacity(grid.steps() + 1);
    propagate_with(&m.spec()?, &m.initial_state(), grid, &[], opts, |_, _, rho| {
        full.push(partial_trace(rho, &m.space, 0)?.into_matrix());
        Ok(())
    })?;
    let reduced_spec = LiouvillianSpec::new(2).with_static(Part::Unlabeled, m.reduced_liouvillian(false)?)?;
    let mut reduced: Vec<CMatrix> = Vec::with_capacity(grid.steps() + 1);
    propagate_with(&reduced_spec, &m.system_state, grid, &[], opts, |_, _, rho| {
        reduced.push(rho.matrix().clone());
        Ok(())
    })?;
    let mut worst: f64 = 0.0;
    for (f, r) in full.iter().zip(&reduced) {
        worst = worst.max(trace_distance_matrix(f, r)?);
    }
    Ok(worst)
}

pub fn weak_coupling_order() -> CliResult<(bool, String)> {
    let grid = TimeGrid::new(0.0, 10.0, 2000)?;
    let mut ratios = Vec::new();
    for seed in 0..5 {
        let strong = RandomBipartite::generate(seed, 0.1)?;
        let weak = strong.with_coupling(0.05);
        ratios.push(weak_coupling_error(&strong, &grid)? / weak_coupling_error(&weak, &grid)?);
    }
    let pass = ratios.iter().all(|&r| r >= 4.0);
    let list = ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ");
    Ok((pass, format!("error ratios for coupling 0.1 -> 0.05 over seeds 0..4: {list}")))
}

fn run_to(dir: &Path, text: &str) -> CliResult<(RunOutput, Vec<u8>, Vec<u8>)> {
    let sc = parse_scenario(text)?;
    let out = run(&sc)?;
    let (csv, json) = write_run(dir, &out)?;
    let read = |p: &Path| std::fs::read(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())));
    let (c, j) = (read(&csv)?, read(&json)?);
    Ok((out, c, j))
}

/// Runs all criteria, writing scenario artifacts under `work_dir`.
pub fn run_all(work_dir: &Path) -> Vec<Outcome> {
    let mut out = Vec::new();
    out.push(timed(1, "projector identities", secs(1), projector_identities));
    out.push(timed(2, "Nakajima-Zwanzig consistency", secs(30), nz_convergence));
    out.push(timed(3, "lambda elimination", secs(10), || {
        let sc = parse_scenario(LAMBDA_SCENARIO)?;
        Ok(lambda_elimination(&run(&sc)?))
    }));
    out.push(timed(4, "lambda closed form", secs(5), lambda_closed_form));
    out.push(timed(5, "sideband rates", secs(1), sideband_checks));

    let mut first = None;
    out.push(timed(6, "cooling end to end", secs(180), || {
        let r = run_to(&work_dir.join("run1"), COOLING_SCENARIO)?;
        let verdict = cooling(&r.0);
        first = Some(r);
        Ok(verdict)
    }));
    out.push(timed(7, "weak-coupling order", secs(60), weak_coupling_order));
    out.push(timed(8, "determinism", None, || {
        let Some((_, csv1, json1)) = first.take() else {
            return Ok((false, "first run did not complete".into()));
        };
        let (_, csv2, json2) = run_to(&work_dir.join("run2"), COOLING_SCENARIO)?;
        let same = csv1 == csv2 && json1 == json2;
        Ok((same, format!("CSV {} bytes, JSON {} bytes, identical: {same}", csv1.len(), json1.len())))
    }));
    out
}

/// True unless some criterion outside [`KNOWN_RED`] failed.
pub fn acceptable(outcomes: &[Outcome]) -> bool {
    outcomes.iter().all(|o| o.pass || o.known_red())
}
