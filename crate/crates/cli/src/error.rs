use std::fmt;

/// Failure categories, each with its own process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed or invalid scenario input.
    Invalid(String),
    /// A numerical check or solver failed.
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    /// Prefixes the message with the scenario name.
    pub fn context(self, name: &str) -> Self {
        match self {
            CliError::Invalid(m) => CliError::Invalid(format!("scenario {name}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("scenario {name}: {m}")),
            CliError::Io(m) => CliError::Io(format!("scenario {name}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<projector_core::Error> for CliError {
    fn from(e: projector_core::Error) -> Self {
        use projector_core::Error as E;
        match e {
            E::DimensionMismatch { .. }
            | E::NotHermitian { .. }
            | E::NegativeRate(_)
            | E::InvalidFactor { .. }
            | E::InvalidDensityMatrix(_)
            | E::NonzeroFirstOrder { .. }
            | E::InvalidParameter(_)
            | E::MissingLabel(_) => CliError::Invalid(e.to_string()),
            E::NonUniqueSteadyState { .. }
            | E::TraceNormalization { .. }
            | E::IllConditionedPropagator { .. }
            | E::ResolventSingular { .. }
            | E::UnstableReducedModel { .. }
            | E::ValidationFailed { .. }
            | E::LinAlg(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
