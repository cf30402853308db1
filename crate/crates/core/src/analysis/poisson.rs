//! Desk-scale Poisson equation for the joint fast generator.
//!
//! On `E^{N-1}` the fast generator is the Kronecker sum of the single-site
//! within-class generators at the local voltages. It never changes class
//! labels, so it splits into one irreducible block per class assignment
//! `J = (j_1, ..., j_{N-1})`, each with the product quasi-stationary measure
//! `π_J` as its unique invariant law. The equation `B f = ⟨G_r(u) - F_r̄(u), φ⟩`
//! is solvable iff the right-hand side is `π_J`-centred for every `J`, and the
//! solution is made unique by requiring `π_J(f) = 0` for every `J`.

use nalgebra::DMatrix;

use crate::field::{class_weights, Field, TestFunction};
use crate::kinetics::{solve_in_place, KineticScheme};

use super::AnalysisError;

/// Largest joint state space handled.
pub const MAX_JOINT_STATES: usize = 4096;
/// Largest joint state space for which the dense SVD cross-check runs.
pub const MAX_SVD_STATES: usize = 1024;
/// Solvability tolerance on `|π_J(rhs)|`.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSolution {
    /// Solution indexed by joint configuration; channel 0 is the most
    /// significant base-`|E|` digit.
    pub f: Vec<f64>,
    pub channels: usize,
    pub states: usize,
    /// `‖B f - rhs‖∞`.
    pub residual: f64,
    /// `π_J(f)` per class assignment.
    pub centerings: Vec<f64>,
    /// `π_J(rhs)` per class assignment.
    pub orthogonality: Vec<f64>,
    /// Numerical kernel dimension of `B` (SVD), when computed.
    pub kernel_dim: Option<usize>,
    /// `‖f_c - f‖∞` where `f_c` is the minimum-norm SVD solution projected
    /// onto the centred subspace, when computed.
    pub uniqueness_gap: Option<f64>,
}

impl PoissonSolution {
    pub fn max_centering(&self) -> f64 {
        self.centerings.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn report(&self) -> String {
        let mut out = format!(
            "joint states = {} ({} channels x {} states)\nresidual = {:e}\nmax |centering| = {:e}\nmax |orthogonality| = {:e}\n",
            self.f.len(),
            self.channels,
            self.states,
            self.residual,
            self.max_centering(),
            self.orthogonality.iter().fold(0.0f64, |m, c| m.max(c.abs())),
        );
        if let Some(k) = self.kernel_dim {
            out.push_str(&format!(
                "kernel dimension = {k} (class assignments = {})\n",
                self.centerings.len()
            ));
        }
        if let Some(g) = self.uniqueness_gap {
            out.push_str(&format!("min-norm vs centred gap = {g:e}\n"));
        }
        out
    }
}

/// The joint problem at a frozen field.
struct Joint<'s> {
    scheme: &'s KineticScheme,
    channels: usize,
    states: usize,
    /// `B_i` per site, dense `m × m`.
    site_gen: Vec<Vec<f64>>,
    /// `μ_j(v_i)` per site and class.
    site_mu: Vec<Vec<Vec<f64>>>,
    /// Per-site rhs term by state.
    site_rhs: Vec<Vec<f64>>,
}

impl<'s> Joint<'s> {
    fn new(
        scheme: &'s KineticScheme,
        u: &Field,
        phi: &TestFunction,
    ) -> Result<Self, AnalysisError> {
        let grid = u.grid();
        let channels = grid.channels();
        let m = scheme.n_states();
        let total = (m as f64).powi(channels as i32);
        if total > MAX_JOINT_STATES as f64 {
            return Err(AnalysisError::TooLarge {
                states: total as usize,
                max: MAX_JOINT_STATES,
            });
        }
        let n = grid.n() as f64;
        let mut site_gen = Vec::with_capacity(channels);
        let mut site_mu = Vec::with_capacity(channels);
        let mut site_rhs = Vec::with_capacity(channels);
        for i in 0..channels {
            let v = u.at_channel(i);
            let mut g = vec![0.0; m * m];
            for s in 0..m {
                let mut out = 0.0;
                for t in scheme.outgoing(s).filter(|t| scheme.is_within_class(t)) {
                    let r = t.eval(v);
                    g[s * m + t.to] += r;
                    out += r;
                }
                g[s * m + s] = -out;
            }
            let mus: Vec<Vec<f64>> = (0..scheme.n_classes())
                .map(|j| scheme.quasi_stationary(j, v).map(|d| d.into_probs()))
                .collect::<Result<_, _>>()?;
            let w = phi.value(grid.channel_position(i)) / n;
            let rhs = (0..m)
                .map(|s| {
                    let j = scheme.class_of(s);
                    let (gc, gv) = class_weights(scheme, j, &mus[j]);
                    let full = scheme.conductance(s) * (scheme.reversal(s) - v);
                    (full - (gv - gc * v)) * w
                })
                .collect();
            site_gen.push(g);
            site_mu.push(mus);
            site_rhs.push(rhs);
        }
        Ok(Self {
            scheme,
            channels,
            states: m,
            site_gen,
            site_mu,
            site_rhs,
        })
    }

    fn dim(&self) -> usize {
        self.states.pow(self.channels as u32)
    }

    fn digits(&self, mut r: usize) -> Vec<usize> {
        let mut d = vec![0; self.channels];
        for i in (0..self.channels).rev() {
            d[i] = r % self.states;
            r /= self.states;
        }
        d
    }

    fn index(&self, d: &[usize]) -> usize {
        d.iter().fold(0, |acc, &s| acc * self.states + s)
    }

    fn rhs(&self, d: &[usize]) -> f64 {
        d.iter()
            .enumerate()
            .map(|(i, &s)| self.site_rhs[i][s])
            .sum()
    }

    /// Class assignments, each with its member configurations and `π_J`.
    fn blocks(&self) -> Vec<(Vec<usize>, Vec<f64>)> {
        let l = self.scheme.n_classes();
        let n_blocks = l.pow(self.channels as u32);
        let mut out: Vec<(Vec<usize>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); n_blocks];
        for r in 0..self.dim() {
            let d = self.digits(r);
            let mut b = 0;
            let mut p = 1.0;
            for (i, &s) in d.iter().enumerate() {
                let j = self.scheme.class_of(s);
                b = b * l + j;
                p *= self.site_mu[i][j][self.scheme.position_in_class(s)];
            }
            out[b].0.push(r);
            out[b].1.push(p);
        }
        out
    }

    /// `(B f)(r)`.
    fn apply(&self, f: &[f64], r: usize) -> f64 {
        let d = self.digits(r);
        let mut acc = 0.0;
        let mut e = d.clone();
        for i in 0..self.channels {
            let g = &self.site_gen[i];
            for s in 0..self.states {
                let x = g[d[i] * self.states + s];
                if x != 0.0 {
                    e[i] = s;
                    acc += x * f[self.index(&e)];
                }
            }
            e[i] = d[i];
        }
        acc
    }

    fn dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut b = DMatrix::zeros(n, n);
        for r in 0..n {
            let d = self.digits(r);
            let mut e = d.clone();
            for i in 0..self.channels {
                for s in 0..self.states {
                    let x = self.site_gen[i][d[i] * self.states + s];
                    if x != 0.0 {
                        e[i] = s;
                        b[(r, self.index(&e))] += x;
                    }
                }
                e[i] = d[i];
            }
        }
        b
    }
}

/// `π_J(⟨G_r(u) - F_r̄(u), φ⟩)` for every class assignment `J`, by brute-force
/// summation over the joint configurations.
pub fn fredholm_orthogonality(
    scheme: &KineticScheme,
    u: &Field,
    phi: &TestFunction,
) -> Result<Vec<f64>, AnalysisError> {
    let joint = Joint::new(scheme, u, phi)?;
    Ok(joint
        .blocks()
        .iter()
        .map(|(members, pi)| {
            members
                .iter()
                .zip(pi)
                .map(|(&r, p)| p * joint.rhs(&joint.digits(r)))
                .sum()
        })
        .collect())
}

/// Solves `B f = ⟨G_r(u) - F_r̄(u), φ⟩` with `π_J(f) = 0` for every `J`.
pub fn poisson_solve(
    scheme: &KineticScheme,
    u: &Field,
    phi: &TestFunction,
) -> Result<PoissonSolution, AnalysisError> {
    let joint = Joint::new(scheme, u, phi)?;
    let n = joint.dim();
    let rhs: Vec<f64> = (0..n).map(|r| joint.rhs(&joint.digits(r))).collect();
    let blocks = joint.blocks();
    let orthogonality: Vec<f64> = blocks
        .iter()
        .map(|(members, pi)| members.iter().zip(pi).map(|(&r, p)| p * rhs[r]).sum())
        .collect();
    if let Some(&worst) = orthogonality
        .iter()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .filter(|w| w.abs() > ORTHOGONALITY_TOL)
    {
        return Err(AnalysisError::Orthogonality(worst));
    }

    // bordered solve per block: [B_J 1; π_Jᵀ 0] [f; c] = [rhs; 0]
    let mut f = vec![0.0; n];
    for (members, pi) in &blocks {
        let b = members.len();
        let k = b + 1;
        let local: std::collections::HashMap<usize, usize> =
            members.iter().enumerate().map(|(a, &r)| (r, a)).collect();
        let mut a = vec![0.0; k * k];
        let mut x = vec![0.0; k];
        for (row, &r) in members.iter().enumerate() {
            let d = joint.digits(r);
            let mut e = d.clone();
            for i in 0..joint.channels {
                for s in 0..joint.states {
                    let g = joint.site_gen[i][d[i] * joint.states + s];
                    if g != 0.0 {
                        e[i] = s;
                        a[row * k + local[&joint.index(&e)]] += g;
                    }
                }
                e[i] = d[i];
            }
            a[row * k + b] = 1.0;
            a[b * k + row] = pi[row];
            x[row] = rhs[r];
        }
        solve_in_place(k, &mut a, &mut x);
        for (row, &r) in members.iter().enumerate() {
            f[r] = x[row];
        }
    }

    let residual = (0..n)
        .map(|r| (joint.apply(&f, r) - rhs[r]).abs())
        .fold(0.0, f64::max);
    let centre = |g: &[f64], members: &[usize], pi: &[f64]| -> f64 {
        members.iter().zip(pi).map(|(&r, p)| p * g[r]).sum()
    };
    let centerings: Vec<f64> = blocks.iter().map(|(m, pi)| centre(&f, m, pi)).collect();

    let (kernel_dim, uniqueness_gap) = if n <= MAX_SVD_STATES {
        let svd = joint.dense().svd(true, true);
        let smax = svd.singular_values.max();
        let tol = 1e-10 * smax.max(1.0);
        let kernel = svd.singular_values.iter().filter(|&&s| s <= tol).count();
        let b = nalgebra::DVector::from_vec(rhs.clone());
        let f0 = svd
            .solve(&b, tol)
            .map_err(|e| AnalysisError::Mismatch(e.to_string()))?;
        let mut fc: Vec<f64> = f0.iter().copied().collect();
        for (members, pi) in &blocks {
            let c = centre(&fc, members, pi);
            for &r in members {
                fc[r] -= c;
            }
        }
        let gap = fc
            .iter()
            .zip(&f)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        (Some(kernel), Some(gap))
    } else {
        (None, None)
    };

    Ok(PoissonSolution {
        f,
        channels: joint.channels,
        states: joint.states,
        residual,
        centerings,
        orthogonality,
        kernel_dim,
        uniqueness_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    fn field(n: usize, f: impl Fn(f64) -> f64) -> Field {
        Field::from_fn(Grid::new(2 * n, n).unwrap(), f)
    }

    #[test]
    fn toy_two_channels() {
        let s = KineticScheme::toy2();
        let u = field(3, |x| 0.3 + x);
        let sol = poisson_solve(&s, &u, &TestFunction::sine()).unwrap();
        assert_eq!(sol.f.len(), 4);
        assert!(sol.orthogonality[0].abs() < 1e-12);
        assert!(sol.residual < 1e-10, "{}", sol.residual);
        assert!(sol.max_centering() < 1e-12);
        assert_eq!(sol.kernel_dim, Some(1));
        assert!(sol.uniqueness_gap.unwrap() < 1e-10);
    }

    #[test]
    fn dense_oracle_for_toy() {
        // hand-built 4×4 joint generator for rates a = 2 (C→O), b = 1 (O→C)
        let s = KineticScheme::toy2();
        let u = field(3, |x| 0.5 * x);
        let sol = poisson_solve(&s, &u, &TestFunction::sine()).unwrap();
        let (a, b) = (2.0, 1.0);
        let g = [
            [-2.0 * a, a, a, 0.0],
            [b, -(a + b), 0.0, a],
            [b, 0.0, -(a + b), a],
            [0.0, b, b, -2.0 * b],
        ];
        let pi = [1.0 / 9.0, 2.0 / 9.0, 2.0 / 9.0, 4.0 / 9.0];
        let grid = u.grid();
        let h = |i: usize, open: bool| {
            let v = u.at_channel(i);
            let phi = TestFunction::sine().value(grid.channel_position(i));
            ((if open { 1.0 - v } else { 0.0 }) - 2.0 / 3.0 * (1.0 - v)) * phi / 3.0
        };
        let rhs: Vec<f64> = (0..4)
            .map(|r| h(0, r & 2 != 0) + h(1, r & 1 != 0))
            .collect();
        for r in 0..4 {
            let bf: f64 = (0..4).map(|c| g[r][c] * sol.f[c]).sum();
            assert!((bf - rhs[r]).abs() < 1e-12);
        }
        let c: f64 = (0..4).map(|r| pi[r] * sol.f[r]).sum();
        assert!(c.abs() < 1e-12);
    }

    #[test]
    fn zero_test_function_gives_zero() {
        let s = KineticScheme::toy2();
        let sol = poisson_solve(&s, &field(3, |x| x), &TestFunction::Zero).unwrap();
        assert!(sol.f.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn sodium_single_class() {
        let s = KineticScheme::na8().restrict_to_class(1).unwrap();
        let u = field(3, |x| 90.0 * (std::f64::consts::PI * x).sin());
        let sol = poisson_solve(&s, &u, &TestFunction::sine()).unwrap();
        assert!(sol.residual < 1e-10, "{}", sol.residual);
        assert_eq!(sol.kernel_dim, Some(1));
        assert!(sol.uniqueness_gap.unwrap() < 1e-10);
    }

    #[test]
    fn sodium_two_classes() {
        let s = KineticScheme::na8();
        let u = field(3, |x| 40.0 * x);
        let sol = poisson_solve(&s, &u, &TestFunction::sine()).unwrap();
        assert_eq!(sol.centerings.len(), 4);
        assert_eq!(sol.kernel_dim, Some(4));
        assert!(sol.residual < 1e-9, "{}", sol.residual);
        assert!(sol.uniqueness_gap.unwrap() < 1e-9);
    }

    #[test]
    fn too_large() {
        let s = KineticScheme::na8();
        assert!(matches!(
            poisson_solve(&s, &field(6, |_| 0.0), &TestFunction::sine()),
            Err(AnalysisError::TooLarge { .. })
        ));
    }
}
