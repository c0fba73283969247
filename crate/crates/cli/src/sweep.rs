//! One-parameter sweeps. Points run concurrently; rows come back in input
//! order.

use serde_json::Value;

use projector_core::Execution;

use crate::error::{CliError, CliResult};
use crate::output::fmt_f64;
use crate::run::{run, RunSummary};
use crate::scenario::from_value;

pub const SWEEP_HEADER: [&str; 10] = [
    "value",
    "max_trace_distance",
    "gamma_h",
    "gamma_c",
    "delta_m",
    "cooperativity",
    "occupation",
    "occupation_reduced_steady",
    "occupation_full_steady",
    "structure_max_residual",
];

/// Replaces the scalar at a dotted `path` (e.g. `params.g`).
pub fn patch(doc: &Value, path: &str, x: f64) -> CliResult<Value> {
    let mut out = doc.clone();
    let mut cur = &mut out;
    for key in path.split('.') {
        cur = match cur {
            Value::Object(map) => map.get_mut(key),
            Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| CliError::Invalid(format!("parameter path {path:?} does not resolve")))?;
    }
    if !cur.is_number() {
        return Err(CliError::Invalid(format!("parameter path {path:?} does not hold a scalar")));
    }
    let n = if cur.is_u64() && x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 {
        Value::from(x as u64)
    } else {
        serde_json::Number::from_f64(x)
            .map(Value::Number)
            .ok_or_else(|| CliError::Invalid(format!("sweep value {x} is not finite")))?
    };
    *cur = n;
    Ok(out)
}

pub fn parse_values(list: &str) -> CliResult<Vec<f64>> {
    if list.trim().is_empty() {
        return Ok(Vec::new());
    }
    list.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Invalid(format!("sweep value {v:?}: {e}")))
        })
        .collect()
}

fn cell(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn row(value: f64, s: &RunSummary) -> String {
    let rates = s.rates.as_ref();
    let occ = s.occupation.as_ref();
    [
        fmt_f64(value),
        fmt_f64(s.max_trace_distance),
        cell(rates.map(|r| r.gamma_h)),
        cell(rates.map(|r| r.gamma_c)),
        cell(rates.map(|r| r.delta_m)),
        cell(rates.and_then(|r| r.cooperativity)),
        cell(occ.map(|o| o.formula)),
        cell(occ.and_then(|o| o.reduced_steady)),
        cell(occ.and_then(|o| o.full_steady)),
        fmt_f64(s.structure_max_residual),
    ]
    .join(",")
}

/// Runs every point and renders the sweep table. Any failing point fails
/// the sweep.
pub fn sweep(doc: &Value, path: &str, values: &[f64], exec: Execution) -> CliResult<String> {
    patch(doc, path, 0.0)?;
    let scenarios = values
        .iter()
        .map(|&x| from_value(patch(doc, path, x)?))
        .collect::<CliResult<Vec<_>>>()?;
    let summaries = exec.map(&scenarios, |sc| run(sc).map(|o| o.summary));
    let mut text = SWEEP_HEADER.join(",");
    text.push('\n');
    for (x, s) in values.iter().zip(summaries) {
        text.push_str(&row(*x, &s?));
        text.push('\n');
    }
    Ok(text)
}
