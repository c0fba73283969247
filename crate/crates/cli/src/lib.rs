//! Scenario runner for the projector toolkit: full-versus-reduced
//! comparisons, parameter sweeps and the acceptance suite.

pub mod acceptance;
pub mod error;
pub mod output;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use error::{CliError, CliResult};
pub use run::{run, RunOutput, RunSummary};
pub use scenario::{parse_scenario, Scenario};
