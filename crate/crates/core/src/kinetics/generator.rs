//! Rate matrices of finite continuous-time Markov chains and their
//! stationary laws.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::KineticsError;

/// Absolute tolerance (relative to the largest entry) for generator row sums.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Tolerance on the total mass of a [`Distribution`].
pub const MASS_TOL: f64 = 1e-12;

/// Square rate matrix: non-negative off-diagonal entries, rows summing to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl GeneratorMatrix {
    /// Builds a generator from off-diagonal rates `(from, to, rate)`; repeated
    /// pairs accumulate. The diagonal is set so that every row sums to 0.
    pub fn from_rates<I>(dim: usize, rates: I) -> Result<Self, KineticsError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if dim == 0 {
            return Err(KineticsError::InvalidGenerator("dimension 0".into()));
        }
        let mut entries = vec![0.0; dim * dim];
        for (i, j, r) in rates {
            if i >= dim || j >= dim {
                return Err(KineticsError::InvalidGenerator(format!(
                    "index ({i}, {j}) out of range for dimension {dim}"
                )));
            }
            if i == j {
                continue;
            }
            if !(r >= 0.0 && r.is_finite()) {
                return Err(KineticsError::InvalidGenerator(format!(
                    "rate {r} at ({i}, {j})"
                )));
            }
            entries[i * dim + j] += r;
        }
        for i in 0..dim {
            let row = &mut entries[i * dim..(i + 1) * dim];
            row[i] = 0.0;
            let out: f64 = row.iter().sum();
            row[i] = -out;
        }
        Ok(Self { dim, entries })
    }

    /// Validates a dense row-major matrix against the generator invariants.
    pub fn from_dense(dim: usize, entries: Vec<f64>) -> Result<Self, KineticsError> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(KineticsError::InvalidGenerator(format!(
                "{} entries for dimension {dim}",
                entries.len()
            )));
        }
        let scale = entries.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..dim {
            let row = &entries[i * dim..(i + 1) * dim];
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() || (i != j && x < 0.0) {
                    return Err(KineticsError::InvalidGenerator(format!(
                        "entry ({i}, {j}) = {x}"
                    )));
                }
            }
            let s: f64 = row.iter().sum();
            if s.abs() > ROW_SUM_TOL * scale {
                return Err(KineticsError::InvalidGenerator(format!(
                    "row {i} sums to {s}"
                )));
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest absolute row sum, off-diagonal part summed first; exactly 0
    /// for generators built by [`from_rates`](Self::from_rates).
    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                let row = self.row(i);
                let off: f64 = row
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, x)| x)
                    .sum();
                (off + row[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `‖μᵀ G‖∞`.
    pub fn balance_residual(&self, mu: &Distribution) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| mu.probs[i] * self.get(i, j))
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }

    /// Strongly connected components of the nonzero off-diagonal pattern.
    pub fn communicating_classes(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..self.dim).map(|_| g.add_node(())).collect();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j && self.get(i, j) > 0.0 {
                    g.add_edge(nodes[i], nodes[j], ());
                }
            }
        }
        let mut blocks: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut b: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort();
        blocks
    }

    pub fn is_irreducible(&self) -> bool {
        self.communicating_classes().len() == 1
    }
}

/// Probability vector on a finite state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, KineticsError> {
        if probs.is_empty() {
            return Err(KineticsError::InvalidDistribution("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(KineticsError::InvalidDistribution(format!("entry {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(KineticsError::InvalidDistribution(format!(
                "total mass {total}"
            )));
        }
        Ok(Self { probs })
    }

    /// Point mass at `state`.
    pub fn point(dim: usize, state: usize) -> Self {
        let mut probs = vec![0.0; dim];
        probs[state] = 1.0;
        Self { probs }
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    /// Total-variation distance `½ Σ |p - q|`.
    pub fn total_variation(&self, other: &[f64]) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(other)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>()
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

/// Unique stationary law of an irreducible generator.
///
/// One balance equation of `μᵀG = 0` is replaced by the normalisation row and
/// the dense system is solved directly.
pub fn stationary_distribution(g: &GeneratorMatrix) -> Result<Distribution, KineticsError> {
    let blocks = g.communicating_classes();
    if blocks.len() > 1 {
        return Err(KineticsError::Reducible { blocks });
    }
    let mut probs = vec![0.0; g.dim()];
    stationary_unchecked(g.dim(), g.entries(), &mut probs, &mut Vec::new());
    Distribution::new(probs)
}

/// Stationary law of an `n×n` row-major generator assumed irreducible.
///
/// `scratch` is reused across calls; the result lands in `out`.
pub(crate) fn stationary_unchecked(n: usize, g: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
    if n == 1 {
        out[0] = 1.0;
        return;
    }
    scratch.clear();
    scratch.extend_from_slice(&g[..n * n]);
    if !state_reduction(n, scratch, out) {
        scratch.clear();
        scratch.resize(n * n, 0.0);
        // A = Gᵀ with the last row replaced by ones; b = e_n.
        for i in 0..n - 1 {
            for j in 0..n {
                scratch[i * n + j] = g[j * n + i];
            }
        }
        for j in 0..n {
            scratch[(n - 1) * n + j] = 1.0;
        }
        out.iter_mut().for_each(|x| *x = 0.0);
        out[n - 1] = 1.0;
        solve_in_place(n, scratch, out);
    }
    let mut total = 0.0;
    for p in out.iter_mut() {
        // rounding can leave -1e-17 on states with vanishing mass
        if *p < 0.0 {
            *p = 0.0;
        }
        total += *p;
    }
    out.iter_mut().for_each(|p| *p /= total);
}

/// Unnormalised stationary vector by Grassmann-Taksar-Heyman state reduction
/// (no subtractions). Only off-diagonal entries of `a` are read; `a` is
/// destroyed. False if a reduced state has no way back, which for an
/// irreducible chain only happens through underflow.
fn state_reduction(n: usize, a: &mut [f64], out: &mut [f64]) -> bool {
    for k in (1..n).rev() {
        let s: f64 = (0..k).map(|j| a[k * n + j]).sum();
        if !(s > 0.0) {
            return false;
        }
        for i in 0..k {
            a[i * n + k] /= s;
        }
        for i in 0..k {
            let aik = a[i * n + k];
            if aik != 0.0 {
                for j in 0..k {
                    if j != i {
                        a[i * n + j] += aik * a[k * n + j];
                    }
                }
            }
        }
    }
    out[0] = 1.0;
    for k in 1..n {
        out[k] = (0..k).map(|i| out[i] * a[i * n + k]).sum();
    }
    true
}

/// Gaussian elimination with partial pivoting; `a` is row-major `n×n` and is
/// destroyed, `b` is overwritten with the solution.
pub(crate) fn solve_in_place(n: usize, a: &mut [f64], b: &mut [f64]) {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .unwrap_or(col);
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
}
