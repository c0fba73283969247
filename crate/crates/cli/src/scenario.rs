//! Scenario documents.
//!
//! A scenario is strict JSON. Unknown keys anywhere are rejected with their
//! key path. The only defaults are `grid.steps = 4000` and
//! `outputs = ["occupation"]`.
//!
//! ```json
//! {
//!   "name": "cooling",
//!   "model": "optomech",
//!   "params": { "omega_m": 10, "delta": 10, "kappa": 1, "gamma_m": 0.001,
//!               "nbar": 10, "g": 0.05, "n_cav": 4, "n_mech": 12 },
//!   "grid": { "t0": 0, "t1": 20 },
//!   "initial": { "thermal": 1.0 },
//!   "outputs": ["occupation", "position", "steady_state"]
//! }
//! ```
//!
//! `model` is one of `lambda`, `optomech`, `random_bipartite`. Complex
//! parameters (`g`, `omega_a`, `omega_b`) take a number or `[re, im]`.
//! `initial` is `"ground"`, `{"thermal": n̄}` (optomech only) or
//! `{"pure": [c0, c1, ...]}` with one amplitude per system level.
//! `seed` is required for `random_bipartite`.

use num_complex::Complex64 as C64;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use projector_core::dynamics::TimeGrid;
use projector_core::reductions::{LambdaParams, OptomechParams};

use crate::error::{CliError, CliResult};

pub const DEFAULT_STEPS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Lambda,
    Optomech,
    RandomBipartite,
}

impl ModelTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::Lambda => "lambda",
            ModelTag::Optomech => "optomech",
            ModelTag::RandomBipartite => "random_bipartite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexInput> for C64 {
    fn from(c: ComplexInput) -> Self {
        match c {
            ComplexInput::Real(re) => C64::new(re, 0.0),
            ComplexInput::Pair([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct LambdaBlock {
    omega_a: ComplexInput,
    omega_b: ComplexInput,
    delta: f64,
    bigdelta: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptomechBlock {
    omega_m: f64,
    delta: f64,
    kappa: f64,
    gamma_m: f64,
    nbar: f64,
    g: ComplexInput,
    n_cav: usize,
    n_mech: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomBlock {
    coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomParams {
    pub coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Lambda(LambdaParams),
    Optomech(OptomechParams),
    RandomBipartite(RandomParams),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridBlock {
    t0: f64,
    t1: f64,
    #[serde(default = "default_steps")]
    steps: usize,
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial {
    Ground,
    Thermal(f64),
    Pure(Vec<ComplexInput>),
}

/// Observables are evaluated on the system state of both trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Observable {
    /// `Σ_k k |k⟩⟨k|` over system levels (for Λ: the population of `|b⟩`).
    Occupation,
    /// `Σ_k √(k+1) (|k⟩⟨k+1| + h.c.)`.
    Position,
    /// `|1⟩⟨0|`, whose expectation is `ρ₀₁`.
    Coherence,
    /// Λ only: population outside the ground manifold.
    ExcitedPopulation,
}

impl Observable {
    pub fn as_str(self) -> &'static str {
        match self {
            Observable::Occupation => "occupation",
            Observable::Position => "position",
            Observable::Coherence => "coherence",
            Observable::ExcitedPopulation => "excited_population",
        }
    }
}

/// Extra metrics that cost more than a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    /// Steady states of the full and reduced models (optomech only).
    SteadyState,
    /// Projection-operator consistency of the full trajectory.
    NzResidual,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::SteadyState => "steady_state",
            Metric::NzResidual => "nz_residual",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    model: ModelTag,
    params: serde_json::Value,
    grid: GridBlock,
    initial: Initial,
    #[serde(default = "default_outputs")]
    outputs: Vec<String>,
    #[serde(default)]
    seed: Option<u64>,
}

fn default_outputs() -> Vec<String> {
    vec!["occupation".to_string()]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub model: ModelTag,
    pub params: ModelParams,
    pub grid: TimeGrid,
    pub initial: Initial,
    pub observables: Vec<Observable>,
    pub metrics: Vec<Metric>,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn wants(&self, m: Metric) -> bool {
        self.metrics.contains(&m)
    }

    /// Dimension of the system factor.
    pub fn system_dim(&self) -> usize {
        match &self.params {
            ModelParams::Lambda(_) | ModelParams::RandomBipartite(_) => 2,
            ModelParams::Optomech(p) => p.n_mech,
        }
    }
}

fn typed<T: DeserializeOwned>(value: serde_json::Value, prefix: &str) -> CliResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." { prefix.to_string() } else { format!("{prefix}.{path}") };
        CliError::Invalid(format!("at {at}: {}", e.into_inner()))
    })
}

pub fn parse_scenario(text: &str) -> CliResult<Scenario> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        CliError::Invalid(format!("JSON parse error at line {} column {}: {e}", e.line(), e.column()))
    })?;
    from_value(value)
}

/// Validates an already parsed document (used by sweeps after patching).
pub fn from_value(value: serde_json::Value) -> CliResult<Scenario> {
    let raw: RawScenario = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::Invalid(format!("at {path}: {}", e.into_inner()))
    })?;
    let params = match raw.model {
        ModelTag::Lambda => {
            let b: LambdaBlock = typed(raw.params, "params")?;
            let p = LambdaParams {
                omega_a: b.omega_a.into(),
                omega_b: b.omega_b.into(),
                delta: b.delta,
                bigdelta: b.bigdelta,
            };
            p.validate()?;
            ModelParams::Lambda(p)
        }
        ModelTag::Optomech => {
            let b: OptomechBlock = typed(raw.params, "params")?;
            let p = OptomechParams {
                omega_m: b.omega_m,
                delta: b.delta,
                kappa: b.kappa,
                gamma_m: b.gamma_m,
                nbar: b.nbar,
                g: b.g.into(),
                n_cav: b.n_cav,
                n_mech: b.n_mech,
            };
            p.validate()?;
            ModelParams::Optomech(p)
        }
        ModelTag::RandomBipartite => {
            let b: RandomBlock = typed(raw.params, "params")?;
            if !(b.coupling.is_finite() && b.coupling >= 0.0) {
                return Err(CliError::Invalid("coupling must be finite and nonnegative".into()));
            }
            if raw.seed.is_none() {
                return Err(CliError::Invalid("seed is required for random_bipartite".into()));
            }
            ModelParams::RandomBipartite(RandomParams { coupling: b.coupling })
        }
    };
    if raw.name.is_empty() || raw.name.contains(['/', '\\']) {
        return Err(CliError::Invalid("name must be nonempty and contain no path separators".into()));
    }
    let grid = TimeGrid::new(raw.grid.t0, raw.grid.t1, raw.grid.steps)?;

    let mut observables = Vec::new();
    let mut metrics = Vec::new();
    for out in &raw.outputs {
        match out.as_str() {
            "occupation" => observables.push(Observable::Occupation),
            "position" => observables.push(Observable::Position),
            "coherence" => observables.push(Observable::Coherence),
            "excited_population" if raw.model == ModelTag::Lambda => observables.push(Observable::ExcitedPopulation),
            "steady_state" if raw.model == ModelTag::Optomech => metrics.push(Metric::SteadyState),
            "nz_residual" if raw.model != ModelTag::Optomech => metrics.push(Metric::NzResidual),
            other => {
                return Err(CliError::Invalid(format!(
                    "output {other:?} is not available for model {}",
                    raw.model.as_str()
                )))
            }
        }
    }
    observables.sort();
    observables.dedup();
    metrics.sort();
    metrics.dedup();

    let scenario = Scenario {
        name: raw.name,
        model: raw.model,
        params,
        grid,
        initial: raw.initial,
        observables,
        metrics,
        seed: raw.seed,
    };
    match &scenario.initial {
        Initial::Ground => {}
        Initial::Thermal(nbar) => {
            if scenario.model != ModelTag::Optomech {
                return Err(CliError::Invalid("a thermal initial state needs the optomech model".into()));
            }
            if !(nbar.is_finite() && *nbar >= 0.0) {
                return Err(CliError::Invalid("thermal occupation must be finite and nonnegative".into()));
            }
        }
        Initial::Pure(c) => {
            if c.len() != scenario.system_dim() {
                return Err(CliError::Invalid(format!(
                    "pure initial state has {} amplitudes, the system has {} levels",
                    c.len(),
                    scenario.system_dim()
                )));
            }
        }
    }
    Ok(scenario)
}
