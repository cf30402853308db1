//! Point-source reaction terms and their pairing with test functions.
//!
//! A channel at node `y` contributes `(1/N) Σ_ξ c_ξ w_ξ (v_ξ - u(y)) δ_y`,
//! where `w` is the indicator of its state (full model) or the
//! quasi-stationary law of its class (averaged model). On the grid the Dirac
//! mass becomes `1/h` at the coinciding node, so the trapezoid pairing with a
//! test function reproduces `φ(y)` exactly.

use crate::hybrid::{AggregatedConfig, ChannelConfig};
use crate::kinetics::KineticScheme;

use super::{Field, FieldError, Grid, TestFunction};

/// Constant source `amplitude · 1_[lo, hi](x)`, or, with `clamp`, a
/// constraint `u = amplitude` on the interior nodes of `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppliedInput {
    pub amplitude: f64,
    pub lo: f64,
    pub hi: f64,
    pub clamp: bool,
}

impl AppliedInput {
    /// Additive input on `[0, 0.1]` with the given amplitude.
    pub fn additive(amplitude: f64) -> Self {
        Self {
            amplitude,
            lo: 0.0,
            hi: 0.1,
            clamp: false,
        }
    }

    /// Interior nodes covered by the input.
    pub fn nodes(&self, grid: Grid) -> impl Iterator<Item = usize> + '_ {
        (1..grid.cells()).filter(move |&q| {
            let x = grid.x(q);
            x >= self.lo - 1e-12 && x <= self.hi + 1e-12
        })
    }
}

fn check_len(grid: Grid, len: usize) -> Result<(), FieldError> {
    if len != grid.channels() {
        return Err(FieldError::ChannelCount {
            expected: grid.channels(),
            got: len,
        });
    }
    Ok(())
}

/// `(Σ c_ξ w_ξ, Σ c_ξ w_ξ v_ξ)` for a channel in class `j` with
/// quasi-stationary weights `mu` over the class members.
pub(crate) fn class_weights(scheme: &KineticScheme, j: usize, mu: &[f64]) -> (f64, f64) {
    let members = scheme.class_members(j).expect("valid class");
    members
        .iter()
        .zip(mu)
        .fold((0.0, 0.0), |(g, gv), (&s, &p)| {
            let c = scheme.conductance(s) * p;
            (g + c, gv + c * scheme.reversal(s))
        })
}

/// Grid vector of `G_r(u)`: nonzero only at channel nodes.
pub fn reaction_full(
    scheme: &KineticScheme,
    r: &ChannelConfig,
    u: &Field,
) -> Result<Vec<f64>, FieldError> {
    let grid = u.grid();
    check_len(grid, r.len())?;
    let scale = 1.0 / (grid.n() as f64 * grid.h());
    let mut out = vec![0.0; grid.nodes()];
    for (i, &s) in r.states().iter().enumerate() {
        let q = grid.channel_node(i);
        out[q] = scale * scheme.conductance(s) * (scheme.reversal(s) - u.values()[q]);
    }
    Ok(out)
}

/// Grid vector of the averaged reaction `F_r̄(u)`; with a single class this is
/// the all-fast average `F(u)`.
pub fn reaction_averaged(
    scheme: &KineticScheme,
    rbar: &AggregatedConfig,
    u: &Field,
) -> Result<Vec<f64>, FieldError> {
    let grid = u.grid();
    check_len(grid, rbar.len())?;
    let scale = 1.0 / (grid.n() as f64 * grid.h());
    let mut out = vec![0.0; grid.nodes()];
    for (i, &j) in rbar.labels().iter().enumerate() {
        let q = grid.channel_node(i);
        let v = u.values()[q];
        let mu = scheme.quasi_stationary(j, v)?;
        let (g, gv) = class_weights(scheme, j, mu.probs());
        out[q] = scale * (gv - g * v);
    }
    Ok(out)
}

/// Trapezoid pairing of a grid vector with `φ`.
pub fn pair_values(values: &[f64], grid: Grid, phi: &TestFunction) -> f64 {
    let m = grid.cells();
    let h = grid.h();
    let interior: f64 = (1..m).map(|q| values[q] * phi.value(grid.x(q))).sum();
    h * (interior + 0.5 * (values[0] * phi.value(0.0) + values[m] * phi.value(1.0)))
}

/// `L²` pairing `(u, φ)` by the trapezoid rule.
pub fn pair(u: &Field, phi: &TestFunction) -> f64 {
    pair_values(u.values(), u.grid(), phi)
}

/// `⟨G_r(u), φ⟩ = (1/N) Σ_i c_{r(i)} (v_{r(i)} - u(y_i)) φ(y_i)`, exactly.
pub fn pair_reaction_full(
    scheme: &KineticScheme,
    r: &ChannelConfig,
    u: &Field,
    phi: &TestFunction,
) -> Result<f64, FieldError> {
    let grid = u.grid();
    check_len(grid, r.len())?;
    Ok(pair_full_raw(scheme, r.states(), u.values(), grid, phi))
}

fn pair_full_raw(
    scheme: &KineticScheme,
    states: &[usize],
    values: &[f64],
    grid: Grid,
    phi: &TestFunction,
) -> f64 {
    let sum: f64 = states
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let v = values[grid.channel_node(i)];
            scheme.conductance(s) * (scheme.reversal(s) - v) * phi.value(grid.channel_position(i))
        })
        .sum();
    sum / grid.n() as f64
}

/// `⟨F_r̄(u), φ⟩`, exactly.
pub fn pair_reaction_averaged(
    scheme: &KineticScheme,
    rbar: &AggregatedConfig,
    u: &Field,
    phi: &TestFunction,
) -> Result<f64, FieldError> {
    let grid = u.grid();
    check_len(grid, rbar.len())?;
    pair_averaged_raw(scheme, rbar.labels(), u.values(), grid, phi)
}

fn pair_averaged_raw(
    scheme: &KineticScheme,
    labels: &[usize],
    values: &[f64],
    grid: Grid,
    phi: &TestFunction,
) -> Result<f64, FieldError> {
    let mut sum = 0.0;
    for (i, &j) in labels.iter().enumerate() {
        let v = values[grid.channel_node(i)];
        let mu = scheme.quasi_stationary(j, v)?;
        let (g, gv) = class_weights(scheme, j, mu.probs());
        sum += (gv - g * v) * phi.value(grid.channel_position(i));
    }
    Ok(sum / grid.n() as f64)
}
