//! Model constructors: Fock-space building blocks, the far-detuned Λ system,
//! the linearized optomechanical cooling setup and seeded random bipartite
//! models.

mod fock;
mod lambda;
mod optomech;
mod random;

pub use fock::{fock_annihilation, number_operator, thermal_state};
pub use lambda::{build_lambda, LambdaModel, LAMBDA_GROUND};
pub use optomech::{build_optomech, OptomechModel, OptomechOps};
pub use random::RandomBipartite;
