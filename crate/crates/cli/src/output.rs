//! File artifacts. Numbers are written with 17 significant digits so they
//! read back to the same doubles.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};
use crate::run::{RunOutput, RunSummary};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_header(out: &RunOutput) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for s in &out.series {
        let name = s.observable.as_str();
        for side in ["full", "reduced"] {
            h.push(format!("{name}_{side}_re"));
            h.push(format!("{name}_{side}_im"));
        }
    }
    h.push("trace_distance".to_string());
    h
}

pub fn write_trajectory<W: Write>(out: &RunOutput, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{}", trajectory_header(out).join(","))?;
    for (i, &t) in out.times.iter().enumerate() {
        let mut row = vec![fmt_f64(t)];
        for s in &out.series {
            for z in [s.full[i], s.reduced[i]] {
                row.push(fmt_f64(z.re));
                row.push(fmt_f64(z.im));
            }
        }
        row.push(fmt_f64(out.trace_distance[i]));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn summary_json(s: &RunSummary) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(s).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Writes `<name>_trajectory.csv` and `<name>_summary.json`.
pub fn write_run(dir: &Path, out: &RunOutput) -> CliResult<(PathBuf, PathBuf)> {
    ensure_dir(dir)?;
    let name = &out.summary.name;
    let csv = dir.join(format!("{name}_trajectory.csv"));
    let file = fs::File::create(&csv).map_err(|e| io_err(&csv, e))?;
    let mut w = BufWriter::new(file);
    write_trajectory(out, &mut w).and_then(|_| w.flush()).map_err(|e| io_err(&csv, e))?;
    let json = dir.join(format!("{name}_summary.json"));
    write_file(&json, summary_json(&out.summary)?.as_bytes())?;
    Ok((csv, json))
}
