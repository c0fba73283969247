use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix is not Hermitian (max |M - M†| = {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("negative rate {0}")]
    NegativeRate(f64),
    #[error("factor index {index} out of range for a space with {count} factors")]
    InvalidFactor { index: usize, count: usize },
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("non-unique steady state (second-smallest singular value {second:e}, norm {norm:e})")]
    NonUniqueSteadyState { second: f64, norm: f64 },
    #[error("trace-normalization failure: null vector has trace {trace:e}")]
    TraceNormalization { trace: f64 },
    #[error("ill-conditioned propagator at t = {time}: condition number {condition:e}")]
    IllConditionedPropagator { time: f64, condition: f64 },
    #[error("non-invertible bath resolvent: Markov/RWA limit undefined (frequency {freq}: {reason})")]
    ResolventSingular { freq: f64, reason: String },
    #[error("first-order term does not vanish (max |Tr_B[rho_B V]| = {residual:e}); apply mean_field_split first")]
    NonzeroFirstOrder { residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("reduced model unstable: gamma_m + Gamma_c - Gamma_h = {denominator:e}")]
    UnstableReducedModel { denominator: f64 },
    #[error("missing Liouvillian label: {0}")]
    MissingLabel(&'static str),
    #[error("state validation failed at t = {time}: {reason}")]
    ValidationFailed { time: f64, reason: String },
    #[error("linear algebra failure: {0}")]
    LinAlg(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::LinAlg(e.to_string())
    }
}
