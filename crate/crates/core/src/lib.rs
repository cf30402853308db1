//! Spatial stochastic Hodgkin-Huxley axon as a piecewise deterministic
//! Markov process.
//!
//! A cable equation on `[0, 1]` with Dirichlet ends is driven by point
//! sources from `N - 1` ion channels at `i / N`, each a voltage-dependent
//! continuous-time Markov chain. Channel states are partitioned into classes
//! whose internal transitions run `1/ε` times faster than the rest. The crate
//! simulates both this two-timescale model and its averaged reduction, and
//! ships the instruments used to compare them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod field;
pub mod hybrid;
pub mod io;
pub mod kinetics;
