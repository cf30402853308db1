//! Reproducible ensembles.
//!
//! Member `k` of an ensemble with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `k`. Streams are
//! disjoint, so the result of every member is independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator for ensemble member `member` under master seed `master`.
pub fn member_rng(master: u64, member: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(member);
    rng
}

/// Runs `f(k, rng_k)` for `k < size` in parallel; results are in member order.
pub fn run_ensemble<T, F>(size: usize, master: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    run_ensemble_from(size, master, 0, f)
}

/// As [`run_ensemble`], with member `k` on stream `first_stream + k`.
pub fn run_ensemble_from<T, F>(size: usize, master: u64, first_stream: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    (0..size)
        .into_par_iter()
        .map(|k| f(k, &mut member_rng(master, first_stream + k as u64)))
        .collect()
}
