//! Explicit-Euler PDE stepping interleaved with time-rescaled channel jumps.
//!
//! Each step freezes the channel configuration and the jump intensities at
//! the start of the step, advances the field by one explicit Euler step, then
//! fires every jump whose accumulated intensity crosses its unit exponential
//! threshold inside the step.

use rand::Rng;
use rand_distr::{Distribution as _, Exp1};

use crate::field::{class_weights, fd_step_raw, AppliedInput, Field, FieldError, Grid};
use crate::kinetics::{stationary_distribution, KineticScheme};

use super::config::{ModelKind, SimConfig};
use super::types::{AggregatedConfig, ChannelConfig, JumpEvent};
use super::HybridError;

/// `Λ(u, r)`: summed exit intensity of all channels, within-class rates
/// divided by `eps`.
pub fn total_rate(
    scheme: &KineticScheme,
    u: &Field,
    r: &ChannelConfig,
    eps: f64,
) -> Result<f64, HybridError> {
    check_channels(u.grid(), r.len())?;
    Ok(r.states()
        .iter()
        .enumerate()
        .map(|(i, &s)| scheme.exit_rate(s, u.at_channel(i), eps))
        .sum())
}

/// Draws the channel and target state of the next jump.
pub fn sample_transition<R: Rng + ?Sized>(
    scheme: &KineticScheme,
    u: &Field,
    r: &ChannelConfig,
    eps: f64,
    rng: &mut R,
) -> Result<(usize, usize), HybridError> {
    let exits: Vec<f64> = r
        .states()
        .iter()
        .enumerate()
        .map(|(i, &s)| scheme.exit_rate(s, u.at_channel(i), eps))
        .collect();
    check_channels(u.grid(), r.len())?;
    let total: f64 = exits.iter().sum();
    if !(total > 0.0) {
        return Err(HybridError::Absorbing);
    }
    let i = pick(&exits, total, rng);
    let s = r.states()[i];
    let v = u.at_channel(i);
    let targets: Vec<(usize, f64)> = scheme
        .outgoing(s)
        .map(|t| {
            let scale = if scheme.is_within_class(t) {
                1.0 / eps
            } else {
                1.0
            };
            (t.to, t.eval(v) * scale)
        })
        .collect();
    let weights: Vec<f64> = targets.iter().map(|t| t.1).collect();
    let k = pick(&weights, exits[i], rng);
    Ok((i, targets[k].0))
}

fn check_channels(grid: Grid, len: usize) -> Result<(), HybridError> {
    if len != grid.channels() {
        return Err(FieldError::ChannelCount {
            expected: grid.channels(),
            got: len,
        }
        .into());
    }
    Ok(())
}

/// Index drawn with probability `weights[k] / total`.
fn pick<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let mut target = rng.random::<f64>() * total;
    let mut last = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if target < w {
                return k;
            }
            target -= w;
            last = k;
        }
    }
    last
}

fn unit_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let x: f64 = Exp1.sample(rng);
    x.max(f64::MIN_POSITIVE)
}

/// One recorded field.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub values: Vec<f64>,
    /// Number of jumps that occurred before this snapshot.
    pub jump_count: usize,
}

/// The output of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridTrajectory {
    pub config: SimConfig,
    pub scheme: String,
    pub grid: Grid,
    /// Initial channel states (full) or labels (averaged).
    pub initial: Vec<usize>,
    pub snapshots: Vec<Snapshot>,
    pub jumps: Vec<JumpEvent>,
    pub final_discrete: Vec<usize>,
}

impl HybridTrajectory {
    pub fn model(&self) -> ModelKind {
        self.config.model
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn field(&self, k: usize) -> Field {
        let s = &self.snapshots[k];
        Field::new(self.grid, s.values.clone(), s.time).expect("engine keeps ends at 0")
    }

    /// Discrete configuration at every snapshot, by replaying the jump log.
    pub fn discrete_at_snapshots(&self) -> Vec<Vec<usize>> {
        let mut cur = self.initial.clone();
        let mut applied = 0;
        self.snapshots
            .iter()
            .map(|s| {
                for e in &self.jumps[applied..s.jump_count] {
                    cur[e.channel] = e.to;
                }
                applied = s.jump_count;
                cur.clone()
            })
            .collect()
    }
}

/// Class-label path of a full-model trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedPath {
    pub initial: AggregatedConfig,
    /// Between-class jumps only, `from`/`to` are class labels.
    pub jumps: Vec<JumpEvent>,
}

impl AggregatedPath {
    /// Labels at time `t` (jumps at exactly `t` included).
    pub fn labels_at(&self, t: f64) -> Vec<usize> {
        let mut cur = self.initial.labels().to_vec();
        for e in self.jumps.iter().take_while(|e| e.time <= t) {
            cur[e.channel] = e.to;
        }
        cur
    }
}

/// Maps every state to its class and drops within-class jumps.
pub fn aggregate_path(
    scheme: &KineticScheme,
    traj: &HybridTrajectory,
) -> Result<AggregatedPath, HybridError> {
    if traj.model() != ModelKind::Full {
        return Err(HybridError::WrongModel {
            expected: ModelKind::Full,
            got: traj.model(),
        });
    }
    let initial = ChannelConfig::new(scheme, traj.initial.clone())?.aggregate(scheme);
    let jumps = traj
        .jumps
        .iter()
        .filter_map(|e| {
            let (a, b) = (scheme.class_of(e.from), scheme.class_of(e.to));
            (a != b).then_some(JumpEvent {
                time: e.time,
                channel: e.channel,
                from: a,
                to: b,
            })
        })
        .collect();
    Ok(AggregatedPath { initial, jumps })
}

/// A between-class transition seen from inside its source class.
#[derive(Debug, Clone, Copy)]
struct Exit {
    pos: usize,
    to_class: usize,
    transition: usize,
}

/// Steppable simulator state. Most callers want [`simulate`]; the engine is
/// exposed for instruments that observe every step.
#[derive(Debug, Clone)]
pub struct Engine<'s> {
    scheme: &'s KineticScheme,
    cfg: SimConfig,
    grid: Grid,
    steps: usize,
    step: usize,
    values: Vec<f64>,
    next: Vec<f64>,
    source: Vec<f64>,
    input_source: Vec<f64>,
    clamp_nodes: Vec<usize>,
    discrete: Vec<usize>,
    volts: Vec<f64>,
    exit: Vec<f64>,
    /// Reaction current of each channel at its step-start voltage.
    current: Vec<f64>,
    theta: f64,
    jumps: Vec<JumpEvent>,
    // averaged-model scratch
    between: Vec<Vec<Exit>>,
    /// Quasi-stationary law of each channel's class, `max_class` slots per channel.
    mu: Vec<f64>,
    max_class: usize,
    kinds: Vec<f64>,
    gbuf: Vec<f64>,
    scratch: Vec<f64>,
    targets: Vec<f64>,
}

impl<'s> Engine<'s> {
    /// Validates `cfg`, builds `u0`, and draws `q0` unless given.
    pub fn new<R: Rng + ?Sized>(
        scheme: &'s KineticScheme,
        cfg: &SimConfig,
        rng: &mut R,
    ) -> Result<Self, HybridError> {
        cfg.validate(scheme)?;
        let grid = cfg.grid()?;
        let mut values: Vec<f64> = (0..grid.nodes())
            .map(|q| {
                if q == 0 || q == grid.cells() {
                    0.0
                } else {
                    cfg.u0.value(grid.x(q))
                }
            })
            .collect();
        let mut input_source = vec![0.0; grid.nodes()];
        let mut clamp_nodes = Vec::new();
        if let Some(inp) = cfg.input {
            let nodes: Vec<usize> = AppliedInput::nodes(&inp, grid).collect();
            if inp.clamp {
                for &q in &nodes {
                    values[q] = inp.amplitude;
                }
                clamp_nodes = nodes;
            } else {
                for &q in &nodes {
                    input_source[q] = inp.amplitude;
                }
            }
        }
        let channels = grid.channels();
        let discrete = match &cfg.q0 {
            Some(q0) => q0.clone(),
            None => {
                let mut out = Vec::with_capacity(channels);
                for i in 0..channels {
                    let v = values[grid.channel_node(i)];
                    let g = match cfg.model {
                        ModelKind::Full => scheme.full_generator(v, cfg.eps)?,
                        ModelKind::Averaged => scheme.aggregated_generator(v)?,
                    };
                    let law = stationary_distribution(&g)?;
                    out.push(pick(law.probs(), 1.0, rng));
                }
                out
            }
        };
        let mut between = vec![Vec::new(); scheme.n_classes()];
        for (idx, t) in scheme.transitions().iter().enumerate() {
            let (a, b) = (scheme.class_of(t.from), scheme.class_of(t.to));
            if a != b {
                between[a].push(Exit {
                    pos: scheme.position_in_class(t.from),
                    to_class: b,
                    transition: idx,
                });
            }
        }
        let max_class = (0..scheme.n_classes())
            .map(|j| scheme.class_members(j).map_or(0, <[usize]>::len))
            .max()
            .unwrap_or(1);
        let theta = unit_exponential(rng);
        Ok(Self {
            scheme,
            cfg: cfg.clone(),
            grid,
            steps: cfg.steps(),
            step: 0,
            next: vec![0.0; values.len()],
            source: vec![0.0; values.len()],
            values,
            input_source,
            clamp_nodes,
            discrete,
            volts: vec![0.0; channels],
            exit: vec![0.0; channels],
            current: vec![0.0; channels],
            theta,
            jumps: Vec::new(),
            between,
            mu: vec![0.0; max_class * channels],
            max_class,
            kinds: Vec::new(),
            gbuf: Vec::new(),
            scratch: Vec::new(),
            targets: vec![0.0; scheme.n_classes().max(scheme.n_states())],
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.cfg.dt
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn total_steps(&self) -> usize {
        self.steps
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.steps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Channel states (full) or labels (averaged).
    pub fn discrete(&self) -> &[usize] {
        &self.discrete
    }

    /// Jumps fired during the last step.
    pub fn last_jumps(&self) -> &[JumpEvent] {
        &self.jumps
    }

    /// Recomputes the exit intensity and reaction current of channel `i` at
    /// voltage `v` (before the `1/(N h)` factor).
    fn refresh(&mut self, i: usize, v: f64) {
        let d = self.discrete[i];
        let scheme = self.scheme;
        match self.cfg.model {
            ModelKind::Full => {
                self.exit[i] = scheme.exit_rate(d, v, self.cfg.eps);
                self.current[i] = scheme.conductance(d) * (scheme.reversal(d) - v);
            }
            ModelKind::Averaged => {
                let n = scheme.class_members(d).map_or(0, <[usize]>::len);
                let mu = &mut self.mu[i * self.max_class..i * self.max_class + n];
                scheme.kind_values(v, &mut self.kinds);
                scheme.quasi_stationary_with(d, &self.kinds, mu, &mut self.gbuf, &mut self.scratch);
                self.exit[i] = self.between[d]
                    .iter()
                    .map(|e| mu[e.pos] * scheme.transition_rate_with(e.transition, &self.kinds))
                    .sum();
                let (g, gv) = class_weights(scheme, d, mu);
                self.current[i] = gv - g * v;
            }
        }
    }

    /// Target of a jump out of channel `i` at voltage `v`.
    fn draw_target<R: Rng + ?Sized>(&mut self, i: usize, v: f64, rng: &mut R) -> usize {
        let d = self.discrete[i];
        let scheme = self.scheme;
        self.targets.iter_mut().for_each(|w| *w = 0.0);
        match self.cfg.model {
            ModelKind::Full => {
                for t in scheme.outgoing(d) {
                    let scale = if scheme.is_within_class(t) {
                        1.0 / self.cfg.eps
                    } else {
                        1.0
                    };
                    self.targets[t.to] += t.eval(v) * scale;
                }
            }
            ModelKind::Averaged => {
                scheme.kind_values(v, &mut self.kinds);
                let mu = &self.mu[i * self.max_class..];
                for e in &self.between[d] {
                    self.targets[e.to_class] +=
                        mu[e.pos] * scheme.transition_rate_with(e.transition, &self.kinds);
                }
            }
        }
        let total: f64 = self.targets.iter().sum();
        pick(&self.targets, total, rng)
    }

    /// Advances one step of length `dt`.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.jumps.clear();
        let t0 = self.time();
        let dt = self.cfg.dt;
        let channels = self.grid.channels();
        for i in 0..channels {
            let v = self.values[self.grid.channel_node(i)];
            self.volts[i] = v;
            self.refresh(i, v);
        }

        if !self.cfg.frozen_potential {
            self.source.copy_from_slice(&self.input_source);
            let scale = 1.0 / (self.grid.n() as f64 * self.grid.h());
            for i in 0..channels {
                let q = self.grid.channel_node(i);
                self.source[q] += scale * self.current[i];
            }
            let h = self.grid.h();
            let mu = self.cfg.k_diff * dt / (h * h);
            fd_step_raw(&self.values, &mut self.next, &self.source, mu, dt);
            std::mem::swap(&mut self.values, &mut self.next);
            if let Some(inp) = self.cfg.input {
                for &q in &self.clamp_nodes {
                    self.values[q] = inp.amplitude;
                }
            }
        }

        let mut lambda: f64 = self.exit.iter().sum();
        let mut elapsed = 0.0;
        loop {
            let remaining = dt - elapsed;
            if lambda * remaining < self.theta {
                self.theta -= lambda * remaining;
                break;
            }
            elapsed += self.theta / lambda;
            let i = pick(&self.exit, lambda, rng);
            let v = self.volts[i];
            let to = self.draw_target(i, v, rng);
            self.jumps.push(JumpEvent {
                time: t0 + elapsed.min(dt),
                channel: i,
                from: self.discrete[i],
                to,
            });
            self.discrete[i] = to;
            self.refresh(i, v);
            lambda = self.exit.iter().sum();
            self.theta = unit_exponential(rng);
        }
        self.step += 1;
    }
}

/// Runs `cfg` to completion with the given generator.
pub fn simulate<R: Rng + ?Sized>(
    scheme: &KineticScheme,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<HybridTrajectory, HybridError> {
    let mut engine = Engine::new(scheme, cfg, rng)?;
    let initial = engine.discrete().to_vec();
    let mut snapshots = vec![Snapshot {
        time: 0.0,
        values: engine.values().to_vec(),
        jump_count: 0,
    }];
    let mut jumps = Vec::new();
    while !engine.is_finished() {
        engine.step(rng);
        jumps.extend_from_slice(engine.last_jumps());
        let k = engine.step_index();
        if k % cfg.snapshot_stride == 0 || engine.is_finished() {
            snapshots.push(Snapshot {
                time: engine.time(),
                values: engine.values().to_vec(),
                jump_count: jumps.len(),
            });
        }
    }
    Ok(HybridTrajectory {
        config: cfg.clone(),
        scheme: scheme.name().to_string(),
        grid: engine.grid(),
        initial,
        snapshots,
        final_discrete: engine.discrete().to_vec(),
        jumps,
    })
}

fn expect_model(cfg: &SimConfig, expected: ModelKind) -> Result<(), HybridError> {
    if cfg.model != expected {
        return Err(HybridError::WrongModel {
            expected,
            got: cfg.model,
        });
    }
    Ok(())
}

/// Two-timescale model.
pub fn simulate_full<R: Rng + ?Sized>(
    scheme: &KineticScheme,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<HybridTrajectory, HybridError> {
    expect_model(cfg, ModelKind::Full)?;
    simulate(scheme, cfg, rng)
}

/// Averaged model.
pub fn simulate_averaged<R: Rng + ?Sized>(
    scheme: &KineticScheme,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<HybridTrajectory, HybridError> {
    expect_model(cfg, ModelKind::Averaged)?;
    simulate(scheme, cfg, rng)
}
