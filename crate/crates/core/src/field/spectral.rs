//! Sine-basis exponential-Euler integrator built on the mild formulation
//! `u_t = e^{KΔt} u_0 + ∫ e^{KΔ(t-s)} G ds`.
//!
//! Coordinates are stored in the `H¹₀` basis
//! `e_k = √2 sin(kπx) / √(1 + (kπ)²)`, where a Dirac mass at `y` has
//! coordinates `(1 + (kπ)²) e_k(y)`. The `L²` basis `f_k = √2 sin(kπx)`
//! gives the same reconstruction with coordinates `c_k / √(1 + (kπ)²)`.
//!
//! Modes `k > K` are not stepped. Their relaxation time `1/(K_diff (kπ)²)`
//! is far below any practical step, so with the tail closure enabled they
//! are slaved to the frozen Dirac weights through the Green's function
//! remainder `(G(x,y) - Σ_{k≤K} 2 sin(kπx) sin(kπy)/(kπ)²) / K_diff`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};

use crate::hybrid::ChannelConfig;
use crate::kinetics::KineticScheme;

use super::{Field, Grid};

/// Point source `weight · δ_position`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracSource {
    pub position: f64,
    pub weight: f64,
}

/// Coordinates in the `e_k` basis plus the slaved tail sources.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    coeffs: Vec<f64>,
    tail: Vec<DiracSource>,
    time: f64,
}

impl SpectralState {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }
}

/// Green's function of `-d²/dx²` on `[0, 1]` with Dirichlet ends.
pub fn green(x: f64, y: f64) -> f64 {
    let (a, b) = if x < y { (x, y) } else { (y, x) };
    a * (1.0 - b)
}

#[inline]
fn mode_weight(k: usize) -> f64 {
    let kp = k as f64 * PI;
    1.0 + kp * kp
}

/// `e_k(x)`.
#[inline]
pub fn basis_h(k: usize, x: f64) -> f64 {
    SQRT_2 * (k as f64 * PI * x).sin() / mode_weight(k).sqrt()
}

/// `f_k(x)`.
#[inline]
pub fn basis_l2(k: usize, x: f64) -> f64 {
    SQRT_2 * (k as f64 * PI * x).sin()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSolver {
    modes: usize,
    k_diff: f64,
    tail_closure: bool,
}

impl SpectralSolver {
    pub const DEFAULT_MODES: usize = 200;

    pub fn new(modes: usize, k_diff: f64) -> Self {
        assert!(modes >= 1, "at least one mode");
        Self {
            modes,
            k_diff,
            tail_closure: true,
        }
    }

    /// Truncated expansion without the slaved high-mode tail.
    pub fn without_tail(mut self) -> Self {
        self.tail_closure = false;
        self
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    #[inline]
    fn eigenvalue(&self, k: usize) -> f64 {
        let kp = k as f64 * PI;
        self.k_diff * kp * kp
    }

    /// Projects a grid field onto the first `K` modes (trapezoid quadrature).
    pub fn project(&self, u: &Field) -> SpectralState {
        let grid = u.grid();
        let coeffs = (1..=self.modes)
            .map(|k| {
                let cf: f64 = (1..grid.cells())
                    .map(|q| u.values()[q] * basis_l2(k, grid.x(q)))
                    .sum::<f64>()
                    * grid.h();
                cf * mode_weight(k).sqrt()
            })
            .collect();
        SpectralState {
            coeffs,
            tail: Vec::new(),
            time: u.time(),
        }
    }

    /// Zero state.
    pub fn zero(&self) -> SpectralState {
        SpectralState {
            coeffs: vec![0.0; self.modes],
            tail: Vec::new(),
            time: 0.0,
        }
    }

    /// Exponential-Euler step with `sources` frozen over `dt`:
    /// `c_k ← e^{-λ_k dt} c_k + (1 - e^{-λ_k dt}) / λ_k · g_k`,
    /// `g_k = Σ_i w_i (1 + (kπ)²) e_k(y_i)`, `λ_k = K_diff (kπ)²`.
    pub fn step(&self, state: &SpectralState, sources: &[DiracSource], dt: f64) -> SpectralState {
        let coeffs = state
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                let k = idx + 1;
                let g: f64 = sources
                    .iter()
                    .map(|s| s.weight * mode_weight(k) * basis_h(k, s.position))
                    .sum();
                self.advance(k, c, g, dt)
            })
            .collect();
        SpectralState {
            coeffs,
            tail: if self.tail_closure {
                sources.to_vec()
            } else {
                Vec::new()
            },
            time: state.time + dt,
        }
    }

    #[inline]
    fn advance(&self, k: usize, c: f64, g: f64, dt: f64) -> f64 {
        let lambda = self.eigenvalue(k);
        if lambda == 0.0 {
            return c + dt * g;
        }
        let decay = (-lambda * dt).exp();
        let gain = -(-lambda * dt).exp_m1() / lambda;
        decay * c + gain * g
    }

    /// Unresolved-mode response at `x` to a unit Dirac mass at `y`.
    pub fn tail_kernel(&self, x: f64, y: f64) -> f64 {
        if !self.tail_closure || self.k_diff == 0.0 {
            return 0.0;
        }
        let partial: f64 = (1..=self.modes)
            .map(|k| {
                let kp = k as f64 * PI;
                2.0 * (kp * x).sin() * (kp * y).sin() / (kp * kp)
            })
            .sum();
        (green(x, y) - partial) / self.k_diff
    }

    /// Reconstruction from `e_k` coordinates.
    pub fn evaluate(&self, state: &SpectralState, x: f64) -> f64 {
        let resolved: f64 = state
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * basis_h(idx + 1, x))
            .sum();
        resolved + self.tail_value(state, x)
    }

    /// Reconstruction from the equivalent `f_k` coordinates.
    pub fn evaluate_l2(&self, state: &SpectralState, x: f64) -> f64 {
        let resolved: f64 = self
            .coeffs_l2(state)
            .iter()
            .enumerate()
            .map(|(idx, c)| c * basis_l2(idx + 1, x))
            .sum();
        resolved + self.tail_value(state, x)
    }

    fn tail_value(&self, state: &SpectralState, x: f64) -> f64 {
        state
            .tail
            .iter()
            .map(|s| s.weight * self.tail_kernel(x, s.position))
            .sum()
    }

    /// Coordinates in the `L²` basis `f_k`.
    pub fn coeffs_l2(&self, state: &SpectralState) -> Vec<f64> {
        state
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c / mode_weight(idx + 1).sqrt())
            .collect()
    }

    /// Samples the reconstruction on `grid`.
    pub fn reconstruct(&self, state: &SpectralState, grid: Grid) -> Field {
        let f = Field::from_fn(grid, |x| self.evaluate(state, x));
        f.with_time(state.time)
    }

    /// Integrates the frozen-configuration problem
    /// `∂ₜu = K_diff Δu + G_r(u)` from `u0` to `t_end`, re-freezing the
    /// Dirac weights `(1/N) c (v - u(y_i))` at the start of every step.
    /// The tail part of `u(y_i)` is taken at the new weights.
    pub fn run_frozen(
        &self,
        scheme: &KineticScheme,
        r: &ChannelConfig,
        u0: &Field,
        dt: f64,
        t_end: f64,
    ) -> Field {
        let grid = u0.grid();
        let n = grid.channels();
        let k = self.modes;
        let pos: Vec<f64> = (0..n).map(|i| grid.channel_position(i)).collect();
        // basis table e_k(y_i) and (1+(kπ)²) e_k(y_i)
        let table: Vec<f64> = (1..=k)
            .flat_map(|kk| pos.iter().map(move |&y| basis_h(kk, y)))
            .collect();
        let tail: Vec<f64> = pos
            .iter()
            .flat_map(|&x| pos.iter().map(move |&y| (x, y)))
            .map(|(x, y)| self.tail_kernel(x, y))
            .collect();
        let decay: Vec<f64> = (1..=k)
            .map(|kk| (-self.eigenvalue(kk) * dt).exp())
            .collect();
        let gain: Vec<f64> = (1..=k)
            .map(|kk| {
                let l = self.eigenvalue(kk);
                if l == 0.0 {
                    dt
                } else {
                    -(-l * dt).exp_m1() / l
                }
            })
            .collect();
        let scale = 1.0 / grid.n() as f64;
        let cv: Vec<(f64, f64)> = r
            .states()
            .iter()
            .map(|&s| (scheme.conductance(s), scheme.reversal(s)))
            .collect();

        let mut state = self.project(u0);
        let mut weights = vec![0.0; n];
        let mut local = vec![0.0; n];
        let steps = (t_end / dt).round() as usize;
        // The slaved tail feeds back on the weights within the step, so they
        // solve (I + diag(c/N) T) w = (c/N) (v - resolved).
        let closure = DMatrix::from_fn(n, n, |i, j| {
            f64::from(u8::from(i == j)) + scale * cv[i].0 * tail[i * n + j]
        })
        .lu();
        for _ in 0..steps {
            for i in 0..n {
                let resolved: f64 = (0..k).map(|kk| state.coeffs[kk] * table[kk * n + i]).sum();
                local[i] = scale * cv[i].0 * (cv[i].1 - resolved);
            }
            let solved = closure
                .solve(&DVector::from_column_slice(&local))
                .unwrap_or_else(|| DVector::from_column_slice(&local));
            weights.copy_from_slice(solved.as_slice());
            for kk in 0..k {
                let w = mode_weight(kk + 1);
                let g: f64 = (0..n).map(|i| weights[i] * w * table[kk * n + i]).sum();
                state.coeffs[kk] = decay[kk] * state.coeffs[kk] + gain[kk] * g;
            }
            state.time += dt;
        }
        if self.tail_closure {
            state.tail = pos
                .iter()
                .zip(&weights)
                .map(|(&position, &weight)| DiracSource { position, weight })
                .collect();
        }
        self.reconstruct(&state, grid)
    }
}
