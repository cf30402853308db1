//! Serialization: CSV snapshots and jump logs, PGM heatmaps, run manifests,
//! and seed resolution.

mod csv;
mod manifest;
mod pgm;

pub use csv::{jumps_csv, parse_echo, read_matrix, snapshots_csv};
pub use manifest::{sha256_hex, verify_manifest, FileEntry, RunManifest, MANIFEST_NAME};
pub use pgm::{heatmap_pgm, GrayMap};

use thiserror::Error;

use crate::hybrid::ConfigError;

/// Environment variable consulted when no seed is given.
pub const SEED_ENV: &str = "PDMP_AXON_SEED";

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected {expected} columns, got {got}")]
    Ragged {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// The explicit seed, else `PDMP_AXON_SEED`, else 0.
pub fn resolve_seed(explicit: Option<u64>) -> Result<u64, IoError> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            IoError::Format(format!("{SEED_ENV}=`{v}` is not a 64-bit unsigned integer"))
        }),
        Err(_) => Ok(0),
    }
}
