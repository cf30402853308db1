//! Instruments for comparing the two-timescale and averaged models.

mod defect;
mod occupation;
mod poisson;
mod stats;
mod sweep;
mod weak;

pub use defect::{defect_at_horizon, defect_series, DefectSeries};
pub use occupation::{occupation_error, OccupationReport};
pub use poisson::{
    fredholm_orthogonality, poisson_solve, PoissonSolution, MAX_JOINT_STATES, MAX_SVD_STATES,
    ORTHOGONALITY_TOL,
};
pub use stats::{compensated_sum, mean_stderr, weighted_slope};
pub use sweep::{common_dt, epsilon_sweep, SweepReport, SweepRow, MIN_ENSEMBLE};
pub use weak::{pairing_at, weak_compare, WeakReport, WeakRow};

use thiserror::Error;

use crate::hybrid::{ConfigError, HybridError};
use crate::kinetics::KineticsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("ensemble of {size} is too small (need at least {min})")]
    InsufficientEnsemble { size: usize, min: usize },
    #[error("invalid eps ladder {0}")]
    InvalidLadder(String),
    #[error("{0}")]
    WrongModel(String),
    #[error("incompatible inputs: {0}")]
    Mismatch(String),
    #[error("right-hand side is not centred: π_J(rhs) = {0:e}")]
    Orthogonality(f64),
    #[error("joint state space of {states} exceeds the limit {max}")]
    TooLarge { states: usize, max: usize },
    #[error(transparent)]
    Hybrid(#[from] HybridError),
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
}

impl From<ConfigError> for AnalysisError {
    fn from(e: ConfigError) -> Self {
        AnalysisError::Hybrid(e.into())
    }
}
