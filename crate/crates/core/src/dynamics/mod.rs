//! Time integration, exponentials, steady states and the projected-propagator
//! consistency check.

mod expm;
mod nz;
mod propagate;
mod steady;

pub use expm::{expm, superop_exp};
pub use nz::{nz_consistency, nz_consistency_with, NzReport, Quadrature};
pub use propagate::{propagate, propagate_with, CompiledLiouvillian, PropagateOptions};
pub use steady::steady_state;

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::superop::DensityMatrix;

/// Uniform grid `t0, t0 + h, …, t1` with `steps + 1` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs finite t1 > t0, got [{t0}, {t1}]"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidParameter("time grid needs at least one step".into()));
        }
        Ok(TimeGrid { t0, t1, steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    /// Grid point `n`; the last point is exactly `t1`.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.t1
        } else {
            self.t0 + n as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|n| self.time(n)).collect()
    }

    /// Same interval with twice as many steps.
    pub fn refined(&self) -> TimeGrid {
        TimeGrid {
            steps: self.steps * 2,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Empty when the propagation was asked not to keep states.
    pub states: Vec<DensityMatrix>,
    pub observables: BTreeMap<String, Vec<C64>>,
    /// `|Tr ρ(t) − 1|`, worst over the grid.
    pub max_trace_error: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn observable(&self, name: &str) -> Option<&[C64]> {
        self.observables.get(name).map(|v| v.as_slice())
    }

    pub fn last_state(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }
}
