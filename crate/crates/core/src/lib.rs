//! Dense Liouvillian machinery for open quantum systems.
//!
//! The crate builds superoperators on column-stacked density matrices,
//! constructs the product-state projector `P(X) = Tr_B[X] ⊗ ρ_B` and its
//! complement, integrates master equations, and produces reduced
//! system-space generators (weak-coupling Born–Markov, fast-bath adiabatic
//! elimination, and sideband elimination) that can be compared against the
//! full dynamics.
//!
//! Conventions used throughout:
//!
//! * `ħ = 1`; every Hamiltonian is an angular-frequency matrix.
//! * Vectorization stacks columns: entry `(i, j)` of a `d × d` matrix lands at
//!   index `i + j·d`, so `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
//! * Composite spaces are ordered system factor first: `H = H_S ⊗ H_B`.

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod liouvillian;
pub mod models;
pub mod reductions;
pub mod sparse;
pub mod superop;

pub use error::{Error, Result};
pub use exec::Execution;
pub use num_complex::Complex64 as C64;
pub use superop::{CMatrix, DensityMatrix, SuperOperator, TensorSpace, Tolerances};
