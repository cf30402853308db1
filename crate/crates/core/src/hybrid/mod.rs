//! The PDMP engines: the two-timescale model (PDE plus ε-scaled channel
//! jumps) and the averaged model (PDE plus class-label jumps).

mod config;
mod engine;
mod ensemble;
mod types;

pub use config::{
    num, parse_input, parse_pairs, DtBounds, InitialProfile, ModelKind, SimConfig, JUMP_RESOLUTION,
};
pub use engine::{
    aggregate_path, sample_transition, simulate, simulate_averaged, simulate_full, total_rate,
    AggregatedPath, Engine, HybridTrajectory, Snapshot,
};
pub use ensemble::{member_rng, run_ensemble, run_ensemble_from};
pub use types::{AggregatedConfig, ChannelConfig, JumpEvent};

use thiserror::Error;

use crate::field::FieldError;
use crate::kinetics::KineticsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("config: {0}")]
    Parse(String),
    #[error(
        "dt = {dt:e} is not admissible; admissible dt <= {admissible:e} \
         (diffusion/reaction bound {pde:e}, jump-resolution bound {jump:e})"
    )]
    TimeStep {
        dt: f64,
        admissible: f64,
        pde: f64,
        jump: f64,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HybridError {
    #[error("state {state} out of range ({n_states} available)")]
    InvalidState { state: usize, n_states: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("total jump rate is zero: absorbing configuration")]
    Absorbing,
    #[error("expected a {expected} trajectory, got {got}")]
    WrongModel { expected: ModelKind, got: ModelKind },
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
    #[error(transparent)]
    Field(#[from] FieldError),
}
