use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use projector_cli::acceptance::{acceptable, run_all};
use projector_cli::output::{ensure_dir, write_file, write_run};
use projector_cli::sweep::{parse_values, sweep};
use projector_cli::{parse_scenario, run, CliError, CliResult};
use projector_core::Execution;

#[derive(Parser)]
#[command(name = "projector", version, about = "Full versus reduced open-system dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trajectory and summary.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Rerun a scenario over values of one parameter.
    Sweep {
        scenario: PathBuf,
        /// Dotted path to a scalar, e.g. `params.g`.
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the built-in acceptance suite.
    Verify,
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn main_inner(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Run { scenario, out_dir } => {
            let sc = parse_scenario(&read(&scenario)?)?;
            let start = Instant::now();
            let out = run(&sc)?;
            let (csv, json) = write_run(&out_dir, &out)?;
            println!("wrote {} and {}", csv.display(), json.display());
            println!("max trace distance {:.6e}", out.summary.max_trace_distance);
            println!("wall time {:.3}s", start.elapsed().as_secs_f64());
            Ok(true)
        }
        Command::Sweep {
            scenario,
            param,
            values,
            out_dir,
        } => {
            let text = read(&scenario)?;
            let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
                CliError::Invalid(format!("JSON parse error at line {} column {}: {e}", e.line(), e.column()))
            })?;
            // validates the base document before any point runs
            let base = parse_scenario(&text)?;
            let start = Instant::now();
            let table = sweep(&doc, &param, &parse_values(&values)?, Execution::default())?;
            ensure_dir(&out_dir)?;
            let path = out_dir.join(format!("{}_sweep.csv", base.name));
            write_file(&path, table.as_bytes())?;
            println!("wrote {}", path.display());
            println!("wall time {:.3}s", start.elapsed().as_secs_f64());
            Ok(true)
        }
        Command::Verify => {
            let dir = std::env::temp_dir().join(format!("projector-verify-{}", std::process::id()));
            let outcomes = run_all(&dir);
            for o in &outcomes {
                println!("{}", o.line());
            }
            let _ = std::fs::remove_dir_all(&dir);
            Ok(acceptable(&outcomes))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::new().filter_level(log::LevelFilter::Warn).init();
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
