//! The averaging defect `D(t) = ∫₀ᵗ ⟨G_{r_s}(u_s) - F_{r̄_s}(u_s), φ⟩ ds`.

use rand::Rng;

use crate::field::{class_weights, Grid, TestFunction};
use crate::hybrid::{Engine, HybridTrajectory, ModelKind, SimConfig};
use crate::kinetics::KineticScheme;

use super::AnalysisError;

/// `D` sampled at the snapshot times of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl DefectSeries {
    /// `D(T)`.
    pub fn last(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Evaluates the integrand with reusable buffers.
#[derive(Debug, Clone)]
pub(crate) struct DefectIntegrand<'s> {
    scheme: &'s KineticScheme,
    grid: Grid,
    phi: Vec<f64>,
    mu: Vec<f64>,
    g: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'s> DefectIntegrand<'s> {
    pub(crate) fn new(scheme: &'s KineticScheme, grid: Grid, phi: &TestFunction) -> Self {
        let phi = (0..grid.channels())
            .map(|i| phi.value(grid.channel_position(i)))
            .collect();
        Self {
            scheme,
            grid,
            phi,
            mu: vec![0.0; scheme.n_states()],
            g: Vec::new(),
            scratch: Vec::new(),
        }
    }

    /// `⟨G_r(u) - F_r̄(u), φ⟩` for channel states `states`.
    pub(crate) fn eval(&mut self, states: &[usize], values: &[f64]) -> f64 {
        let s = self.scheme;
        let mut sum = 0.0;
        for (i, &xi) in states.iter().enumerate() {
            if self.phi[i] == 0.0 {
                continue;
            }
            let v = values[self.grid.channel_node(i)];
            let j = s.class_of(xi);
            let n = s.class_members(j).map_or(0, <[usize]>::len);
            s.quasi_stationary_into(j, v, &mut self.mu, &mut self.g, &mut self.scratch);
            let (g, gv) = class_weights(s, j, &self.mu[..n]);
            let full = s.conductance(xi) * (s.reversal(xi) - v);
            sum += (full - (gv - g * v)) * self.phi[i];
        }
        sum / self.grid.n() as f64
    }
}

/// Trapezoid rule in time over the snapshots of a full-model trajectory.
pub fn defect_series(
    traj: &HybridTrajectory,
    phi: &TestFunction,
    scheme: &KineticScheme,
) -> Result<DefectSeries, AnalysisError> {
    if traj.model() != ModelKind::Full {
        return Err(AnalysisError::WrongModel(
            "the defect is defined along full-model trajectories".into(),
        ));
    }
    let mut integrand = DefectIntegrand::new(scheme, traj.grid, phi);
    let confs = traj.discrete_at_snapshots();
    let mut times = Vec::with_capacity(confs.len());
    let mut values = Vec::with_capacity(confs.len());
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (snap, conf) in traj.snapshots.iter().zip(&confs) {
        let f = integrand.eval(conf, &snap.values);
        if let Some((t0, f0)) = prev {
            acc += 0.5 * (snap.time - t0) * (f0 + f);
        }
        prev = Some((snap.time, f));
        times.push(snap.time);
        values.push(acc);
    }
    Ok(DefectSeries { times, values })
}

/// `D(T)` of one fresh run, integrated every step without storing snapshots.
pub fn defect_at_horizon<R: Rng + ?Sized>(
    scheme: &KineticScheme,
    cfg: &SimConfig,
    phi: &TestFunction,
    rng: &mut R,
) -> Result<f64, AnalysisError> {
    if cfg.model != ModelKind::Full {
        return Err(AnalysisError::WrongModel(
            "the defect is defined along full-model trajectories".into(),
        ));
    }
    let mut engine = Engine::new(scheme, cfg, rng)?;
    let mut integrand = DefectIntegrand::new(scheme, engine.grid(), phi);
    let dt = cfg.dt;
    let mut prev = integrand.eval(engine.discrete(), engine.values());
    let mut acc = 0.0;
    while !engine.is_finished() {
        engine.step(rng);
        let f = integrand.eval(engine.discrete(), engine.values());
        acc += 0.5 * dt * (prev + f);
        prev = f;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::{member_rng, simulate, InitialProfile};

    fn cfg(name: &str, scheme: &KineticScheme) -> SimConfig {
        let mut cfg = SimConfig::new(name, ModelKind::Full);
        cfg.n = 5;
        cfg.m = 10;
        cfg.t_end = 1.0;
        cfg.snapshot_stride = 1;
        cfg.u0 = InitialProfile::Sine(0.5);
        cfg.with_admissible_dt(scheme).unwrap()
    }

    #[test]
    fn shared_conductances_give_zero_defect() {
        let s = KineticScheme::shared2();
        let traj = simulate(&s, &cfg("shared2", &s), &mut member_rng(0, 0)).unwrap();
        let d = defect_series(&traj, &TestFunction::sine(), &s).unwrap();
        assert_eq!(d.values[0], 0.0);
        assert!(d.values.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn online_matches_series() {
        let s = KineticScheme::toy2();
        let c = cfg("toy2", &s);
        let traj = simulate(&s, &c, &mut member_rng(3, 0)).unwrap();
        let series = defect_series(&traj, &TestFunction::sine(), &s).unwrap();
        let online =
            defect_at_horizon(&s, &c, &TestFunction::sine(), &mut member_rng(3, 0)).unwrap();
        assert!(
            (series.last() - online).abs() < 1e-12,
            "{} {}",
            series.last(),
            online
        );
        assert_eq!(series.times.len(), c.steps() + 1);
        assert_ne!(online, 0.0);
    }

    #[test]
    fn averaged_trajectory_rejected() {
        let s = KineticScheme::toy2();
        let mut c = cfg("toy2", &s);
        c.model = ModelKind::Averaged;
        let c = c.with_admissible_dt(&s).unwrap();
        let traj = simulate(&s, &c, &mut member_rng(0, 0)).unwrap();
        assert!(defect_series(&traj, &TestFunction::sine(), &s).is_err());
    }
}
