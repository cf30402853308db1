//! Channel kinetics: rate functions, kinetic schemes, generator matrices,
//! stationary and quasi-stationary laws, and the aggregated class generator.

mod file;
mod generator;
mod rates;
mod scheme;

pub use file::{load_scheme, parse_scheme, write_scheme};
pub(crate) use generator::solve_in_place;
pub use generator::{
    stationary_distribution, Distribution, GeneratorMatrix, MASS_TOL, ROW_SUM_TOL,
};
pub use rates::{relative_expm1, RateFunction, VOLTAGE_BOX};
pub use scheme::{
    na_diffusion, KineticScheme, Transition, AXIAL_RESISTIVITY, AXON_RADIUS, NA_CONDUCTANCE,
    NA_REVERSAL,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticsError {
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("generator is reducible; communicating blocks {blocks:?}")]
    Reducible { blocks: Vec<Vec<usize>> },
    #[error("class index {class} out of range (scheme has {n_classes} classes)")]
    InvalidClass { class: usize, n_classes: usize },
    #[error("time-scale parameter must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("scheme file: {0}")]
    Parse(String),
}

/// Evaluates a rate function at `v`.
pub fn eval_rate(f: RateFunction, v: f64) -> f64 {
    f.eval(v)
}
