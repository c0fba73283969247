//! Reduced system-space generators.

mod born;
mod interaction;
mod lambda;
mod sideband;

pub use born::{restricted_commutator, second_order_generator, BathResolvent, Method, ReducedGenerator, SecondOrderOptions};
pub use interaction::{mean_field_split, static_shift, InteractionPiece, InteractionSpec, MeanFieldShift, FREQ_TOL};
pub use lambda::{lambda_effective_hamiltonian, LambdaParams};
pub use sideband::{
    adequate_cutoff, cooperativity, extract_sideband_rates, sideband_generator, sideband_generator_on, sideband_rates,
    sideband_spectral, steady_occupation, truncation_bias, OptomechParams, Sideband, SidebandRates,
};
