//! Explicit finite-difference Euler step for `∂ₜu = K Δu + s`.

use super::{Field, FieldError};

/// Largest stable explicit step for diffusion alone, `h² / (2K)`.
pub fn cfl_limit(h: f64, k_diff: f64) -> f64 {
    if k_diff > 0.0 {
        h * h / (2.0 * k_diff)
    } else {
        f64::INFINITY
    }
}

/// `u + dt (K Δ_h u + source)` on the interior, ends clamped to 0.
pub fn fd_step(u: &Field, source: &[f64], k_diff: f64, dt: f64) -> Result<Field, FieldError> {
    let grid = u.grid();
    if source.len() != grid.nodes() {
        return Err(FieldError::Length {
            expected: grid.nodes(),
            got: source.len(),
        });
    }
    let limit = cfl_limit(grid.h(), k_diff);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(FieldError::Cfl {
            dt,
            admissible: limit,
        });
    }
    let mut next = vec![0.0; grid.nodes()];
    fd_step_raw(
        u.values(),
        &mut next,
        source,
        k_diff * dt / (grid.h() * grid.h()),
        dt,
    );
    Ok(Field::new(grid, next, u.time() + dt).expect("boundaries clamped"))
}

/// Unchecked kernel; `mu = K dt / h²`.
#[inline]
pub(crate) fn fd_step_raw(u: &[f64], next: &mut [f64], source: &[f64], mu: f64, dt: f64) {
    let m = u.len() - 1;
    next[0] = 0.0;
    next[m] = 0.0;
    for q in 1..m {
        next[q] = u[q] + mu * (u[q - 1] - 2.0 * u[q] + u[q + 1]) + dt * source[q];
    }
}
