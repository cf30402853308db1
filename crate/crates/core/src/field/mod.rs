//! Spatial discretisation of the cable `[0, 1]`, reaction terms, the two PDE
//! integrators and duality pairings.

mod fd;
mod grid;
mod reaction;
mod spectral;

pub(crate) use fd::fd_step_raw;
pub use fd::{cfl_limit, fd_step};
pub use grid::{Field, Grid, TestFunction};
pub(crate) use reaction::class_weights;
pub use reaction::{
    pair, pair_reaction_averaged, pair_reaction_full, pair_values, reaction_averaged,
    reaction_full, AppliedInput,
};
pub use spectral::{basis_h, basis_l2, green, DiracSource, SpectralSolver, SpectralState};

use thiserror::Error;

use crate::kinetics::KineticsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("grid with {cells} cells cannot host channels at i/{n}: cells must be a positive multiple of N")]
    IncompatibleGrid { cells: usize, n: usize },
    #[error("expected {expected} grid values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("expected {expected} channels, got {got}")]
    ChannelCount { expected: usize, got: usize },
    #[error("boundary values must be 0")]
    Boundary,
    #[error(
        "time step {dt} violates the diffusion stability bound; admissible dt <= {admissible}"
    )]
    Cfl { dt: f64, admissible: f64 },
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
}
