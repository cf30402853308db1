//! Run configuration, its validation, and its `key = value` echo.

use std::fmt;
use std::str::FromStr;

use crate::field::{cfl_limit, AppliedInput, Grid};
use crate::kinetics::{na_diffusion, KineticScheme};

use super::ConfigError;

/// Largest admissible expected number of jumps per step, `Λ_max · dt`.
pub const JUMP_RESOLUTION: f64 = 0.1;
/// Voltages sampled across the envelope when bounding jump intensities.
const ENVELOPE_SAMPLES: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Two-timescale model: every channel state is tracked.
    Full,
    /// Averaged model: only class labels jump, fast kinetics are averaged.
    Averaged,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Full => "full",
            ModelKind::Averaged => "averaged",
        })
    }
}

impl FromStr for ModelKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "full" => Ok(ModelKind::Full),
            "averaged" => Ok(ModelKind::Averaged),
            other => Err(ConfigError::Parse(format!("unknown model `{other}`"))),
        }
    }
}

/// Initial potential profile; end values are always 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialProfile {
    Zero,
    Constant(f64),
    /// `amplitude · sin(πx)`.
    Sine(f64),
}

impl InitialProfile {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            InitialProfile::Zero => 0.0,
            InitialProfile::Constant(c) => c,
            InitialProfile::Sine(a) => a * (std::f64::consts::PI * x).sin(),
        }
    }

    /// Range of interior values.
    fn range(&self) -> (f64, f64) {
        match *self {
            InitialProfile::Zero => (0.0, 0.0),
            InitialProfile::Constant(c) => (c, c),
            InitialProfile::Sine(a) => (a.min(0.0), a.max(0.0)),
        }
    }
}

impl fmt::Display for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            InitialProfile::Zero => f.write_str("zero"),
            InitialProfile::Constant(c) => write!(f, "const:{}", num(c)),
            InitialProfile::Sine(a) => write!(f, "sine:{}", num(a)),
        }
    }
}

impl FromStr for InitialProfile {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "zero" {
            return Ok(InitialProfile::Zero);
        }
        let bad = || ConfigError::Parse(format!("bad initial profile `{s}`"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "const" => Ok(InitialProfile::Constant(value)),
            "sine" => Ok(InitialProfile::Sine(value)),
            _ => Err(bad()),
        }
    }
}

/// Floats are echoed with 17 significant digits (exact round trip).
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Scheme id: a built-in name or a scheme file path.
    pub scheme: String,
    pub model: ModelKind,
    pub eps: f64,
    /// Channel parameter `N` (channels at `i/N`, `i = 1..N-1`).
    pub n: usize,
    /// Grid cells `M`.
    pub m: usize,
    pub dt: f64,
    pub t_end: f64,
    pub k_diff: f64,
    pub input: Option<AppliedInput>,
    pub u0: InitialProfile,
    /// Initial channel states (full) or class labels (averaged); drawn from
    /// the stationary law at `u0` when absent.
    pub q0: Option<Vec<usize>>,
    pub seed: u64,
    pub snapshot_stride: usize,
    /// Skip the PDE: `u` stays at `u0` and only the channels evolve.
    pub frozen_potential: bool,
}

/// The time-step limits of a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtBounds {
    /// Explicit diffusion + point-sink bound, `1 / (2K/h² + c_max/(N h))`.
    pub pde: f64,
    /// `JUMP_RESOLUTION / Λ_max`.
    pub jump: f64,
    /// Upper bound on the summed jump intensity over the voltage envelope.
    pub max_intensity: f64,
}

impl DtBounds {
    pub fn admissible(&self) -> f64 {
        self.pde.min(self.jump)
    }
}

impl SimConfig {
    /// Defaults: `ε = 1`, `N = 10`, `M = 2N`, `T = 1`, zero initial
    /// potential, stride 10, diffusion `a/(2R)` for `na8` and 1 otherwise.
    /// `dt` is left at 0; call [`with_admissible_dt`](Self::with_admissible_dt).
    pub fn new(scheme: impl Into<String>, model: ModelKind) -> Self {
        let scheme = scheme.into();
        let k_diff = if scheme.starts_with("na8") {
            na_diffusion()
        } else {
            1.0
        };
        Self {
            scheme,
            model,
            eps: 1.0,
            n: 10,
            m: 20,
            dt: 0.0,
            t_end: 1.0,
            k_diff,
            input: None,
            u0: InitialProfile::Zero,
            q0: None,
            seed: 0,
            snapshot_stride: 10,
            frozen_potential: false,
        }
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        Grid::new(self.m, self.n).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Number of PDE steps.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// A-priori voltage range of the run.
    pub fn voltage_envelope(&self, scheme: &KineticScheme) -> (f64, f64) {
        let (u_lo, u_hi) = self.u0.range();
        if self.frozen_potential {
            return (u_lo, u_hi);
        }
        let (mut lo, mut hi) = (u_lo.min(0.0), u_hi.max(0.0));
        for s in 0..scheme.n_states() {
            lo = lo.min(scheme.reversal(s));
            hi = hi.max(scheme.reversal(s));
        }
        if let Some(inp) = self.input {
            if inp.clamp {
                lo = lo.min(inp.amplitude);
                hi = hi.max(inp.amplitude);
            } else if inp.amplitude > 0.0 {
                hi += inp.amplitude * self.t_end;
            } else {
                lo += inp.amplitude * self.t_end;
            }
        }
        (lo, hi)
    }

    /// Upper bound on `Λ(u, r)` over the voltage envelope and all
    /// configurations: `(N - 1) ·` the largest single-channel exit intensity.
    pub fn max_intensity(&self, scheme: &KineticScheme) -> f64 {
        let (lo, hi) = self.voltage_envelope(scheme);
        let mut best = 0.0f64;
        for k in 0..ENVELOPE_SAMPLES {
            let v = lo + (hi - lo) * k as f64 / (ENVELOPE_SAMPLES - 1) as f64;
            match self.model {
                ModelKind::Full => {
                    for s in 0..scheme.n_states() {
                        best = best.max(scheme.exit_rate(s, v, self.eps));
                    }
                }
                ModelKind::Averaged => {
                    if let Ok(g) = scheme.aggregated_generator(v) {
                        for j in 0..g.dim() {
                            best = best.max(-g.get(j, j));
                        }
                    }
                }
            }
        }
        1.05 * best * (self.n.saturating_sub(1)) as f64
    }

    pub fn dt_bounds(&self, scheme: &KineticScheme) -> Result<DtBounds, ConfigError> {
        let grid = self.grid()?;
        let pde = if self.frozen_potential {
            f64::INFINITY
        } else {
            let h = grid.h();
            let diffusion = if self.k_diff > 0.0 {
                1.0 / cfl_limit(h, self.k_diff)
            } else {
                0.0
            };
            let sink = scheme.max_conductance() / (self.n as f64 * h);
            let rate = diffusion + sink;
            if rate > 0.0 {
                1.0 / rate
            } else {
                f64::INFINITY
            }
        };
        let max_intensity = self.max_intensity(scheme);
        let jump = if max_intensity > 0.0 {
            JUMP_RESOLUTION / max_intensity
        } else {
            f64::INFINITY
        };
        Ok(DtBounds {
            pde,
            jump,
            max_intensity,
        })
    }

    /// Sets `dt` to the admissible bound, capped so that `T` holds at least
    /// `min_steps` steps.
    pub fn with_admissible_dt(mut self, scheme: &KineticScheme) -> Result<Self, ConfigError> {
        let b = self.dt_bounds(scheme)?;
        let mut dt = b.admissible();
        if !dt.is_finite() {
            dt = self.t_end / 1000.0;
        }
        // round down so that T / dt is an integer
        let steps = (self.t_end / dt).ceil().max(1.0);
        self.dt = self.t_end / steps;
        Ok(self)
    }

    /// Checks every constraint; returns the bounds on success.
    pub fn validate(&self, scheme: &KineticScheme) -> Result<DtBounds, ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("T must be positive, got {}", self.t_end));
        }
        if !(self.k_diff >= 0.0 && self.k_diff.is_finite()) {
            return bad(format!(
                "diffusion coefficient must be >= 0, got {}",
                self.k_diff
            ));
        }
        if self.snapshot_stride == 0 {
            return bad("snapshot stride must be >= 1".into());
        }
        let grid = self.grid()?;
        if let Some(q0) = &self.q0 {
            let limit = match self.model {
                ModelKind::Full => scheme.n_states(),
                ModelKind::Averaged => scheme.n_classes(),
            };
            if q0.len() != grid.channels() || q0.iter().any(|&s| s >= limit) {
                return bad(format!(
                    "initial configuration needs {} entries below {limit}",
                    grid.channels()
                ));
            }
        }
        let b = self.dt_bounds(scheme)?;
        let admissible = b.admissible();
        if !(self.dt > 0.0) || self.dt > admissible * (1.0 + 1e-12) {
            return Err(ConfigError::TimeStep {
                dt: self.dt,
                admissible,
                pde: b.pde,
                jump: b.jump,
            });
        }
        Ok(b)
    }

    /// `key = value` pairs using the CLI flag names.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("model".to_string(), self.model.to_string()),
            ("scheme".into(), self.scheme.clone()),
            ("eps".into(), num(self.eps)),
            ("N".into(), self.n.to_string()),
            ("M".into(), self.m.to_string()),
            ("dt".into(), num(self.dt)),
            ("T".into(), num(self.t_end)),
            ("k-diff".into(), num(self.k_diff)),
        ];
        match self.input {
            Some(inp) => {
                out.push((
                    "input".into(),
                    format!("{}:{}:{}", num(inp.amplitude), num(inp.lo), num(inp.hi)),
                ));
                out.push(("clamp-input".into(), inp.clamp.to_string()));
            }
            None => out.push(("input".into(), "none".into())),
        }
        out.push(("u0".into(), self.u0.to_string()));
        if let Some(q0) = &self.q0 {
            out.push((
                "q0".into(),
                q0.iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ));
        }
        out.push(("seed".into(), self.seed.to_string()));
        out.push(("snapshot-stride".into(), self.snapshot_stride.to_string()));
        out.push(("frozen-potential".into(), self.frozen_potential.to_string()));
        out
    }

    /// Inverse of [`to_pairs`](Self::to_pairs); keys not present keep the
    /// defaults of [`SimConfig::new`], except that a missing `M` becomes the
    /// smallest multiple of `N` that is at least 20.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let pairs: Vec<(&str, &str)> = pairs.into_iter().collect();
        let get = |k: &str| {
            pairs
                .iter()
                .rev()
                .find(|(key, _)| *key == k)
                .map(|(_, v)| v.trim())
        };
        let scheme = get("scheme").unwrap_or("na8");
        let model = get("model")
            .map(str::parse)
            .transpose()?
            .unwrap_or(ModelKind::Averaged);
        let mut cfg = SimConfig::new(scheme, model);
        fn p<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
            v.parse()
                .map_err(|_| ConfigError::Parse(format!("bad value `{v}` for `{key}`")))
        }
        let mut clamp = false;
        let mut input = None;
        for (key, value) in &pairs {
            let value = value.trim();
            match *key {
                "model" | "scheme" => {}
                "eps" => cfg.eps = p(key, value)?,
                "N" => cfg.n = p(key, value)?,
                "M" => cfg.m = p(key, value)?,
                "dt" => cfg.dt = p(key, value)?,
                "T" => cfg.t_end = p(key, value)?,
                "k-diff" => cfg.k_diff = p(key, value)?,
                "input" => input = parse_input(value)?,
                "clamp-input" => clamp = p(key, value)?,
                "u0" => cfg.u0 = value.parse()?,
                "q0" => {
                    cfg.q0 = Some(
                        value
                            .split(',')
                            .map(|s| p::<usize>(key, s.trim()))
                            .collect::<Result<_, _>>()?,
                    )
                }
                "seed" => cfg.seed = p(key, value)?,
                "snapshot-stride" => cfg.snapshot_stride = p(key, value)?,
                "frozen-potential" => cfg.frozen_potential = p(key, value)?,
                other => return Err(ConfigError::Parse(format!("unknown key `{other}`"))),
            }
        }
        cfg.input = input.map(|mut i: AppliedInput| {
            i.clamp = clamp;
            i
        });
        if get("M").is_none() && cfg.n > 0 {
            cfg.m = cfg.n * 20usize.div_ceil(cfg.n);
        }
        Ok(cfg)
    }

    /// Parses a plain-text config file of `key = value` lines (`#` comments).
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let pairs = parse_pairs(text)?;
        Self::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    /// Renders the config as a config file.
    pub fn render(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse(format!("line {}: expected `key = value`", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// `none`, `AMP`, or `AMP:LO:HI`.
pub fn parse_input(s: &str) -> Result<Option<AppliedInput>, ConfigError> {
    let s = s.trim();
    if s == "none" {
        return Ok(None);
    }
    let bad = || ConfigError::Parse(format!("bad input `{s}`; expected AMP or AMP:LO:HI"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    match parts.as_slice() {
        [a] => Ok(Some(AppliedInput::additive(*a))),
        [a, lo, hi] if lo <= hi => Ok(Some(AppliedInput {
            amplitude: *a,
            lo: *lo,
            hi: *hi,
            clamp: false,
        })),
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trip() {
        let mut cfg = SimConfig::new("na8", ModelKind::Full);
        cfg.eps = 0.1 + 0.2;
        cfg.dt = 1.0 / 3.0 * 1e-5;
        cfg.input = Some(AppliedInput {
            amplitude: 6.7,
            lo: 0.0,
            hi: 0.1,
            clamp: true,
        });
        cfg.u0 = InitialProfile::Sine(115.0);
        cfg.q0 = Some(vec![1, 7, 3, 0, 0, 0, 0, 0, 0]);
        cfg.seed = u64::MAX;
        cfg.frozen_potential = true;
        let back = SimConfig::parse(&cfg.render()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn dt_bounds_na() {
        let na = KineticScheme::na8();
        let mut cfg = SimConfig::new("na8", ModelKind::Averaged);
        cfg.n = 250;
        cfg.m = 500;
        let b = cfg.dt_bounds(&na).unwrap();
        let h = 1.0 / 500.0;
        let expected_pde = 1.0 / (2.0 * na_diffusion() / (h * h) + 120.0 / (250.0 * h));
        assert!((b.pde - expected_pde).abs() < 1e-15);
        // averaged exits on [0, 115] are a_h(0) = 0.07 or b_h(115) ~ 1
        let bh = 1.0 / ((3.0f64 - 11.5).exp() + 1.0);
        assert!(
            (b.max_intensity - 1.05 * 249.0 * bh).abs() < 1e-9,
            "{}",
            b.max_intensity
        );
        cfg.dt = 1.0;
        match cfg.validate(&na) {
            Err(ConfigError::TimeStep { admissible, .. }) => assert!(admissible < 1e-3),
            other => panic!("{other:?}"),
        }
        let cfg = cfg.with_admissible_dt(&na).unwrap();
        assert!(cfg.validate(&na).is_ok());
    }

    #[test]
    fn eps_tightens_the_jump_bound() {
        let na = KineticScheme::na8();
        let mut cfg = SimConfig::new("na8", ModelKind::Full);
        cfg.n = 20;
        cfg.m = 40;
        let b1 = cfg.dt_bounds(&na).unwrap();
        cfg.eps = 0.1;
        let b01 = cfg.dt_bounds(&na).unwrap();
        assert!(b01.jump < b1.jump / 5.0);
    }

    #[test]
    fn rejects_bad_values() {
        let toy = KineticScheme::toy2();
        let mut cfg = SimConfig::new("toy2", ModelKind::Full);
        cfg.m = 15;
        assert!(cfg.validate(&toy).is_err());
        cfg.m = 20;
        cfg.eps = 0.0;
        assert!(cfg.validate(&toy).is_err());
        cfg.eps = 1.0;
        cfg.q0 = Some(vec![0; 3]);
        assert!(cfg
            .with_admissible_dt(&toy)
            .unwrap()
            .validate(&toy)
            .is_err());
        assert!(SimConfig::parse("bogus = 1").is_err());
        assert!(parse_input("1:2").is_err());
    }

    #[test]
    fn missing_m_is_a_multiple_of_n() {
        let m = |text: &str| SimConfig::parse(text).unwrap().m;
        assert_eq!(m("N = 250"), 250);
        assert_eq!(m("N = 7"), 21);
        assert_eq!(m("N = 10"), 20);
        assert_eq!(m("N = 250\nM = 500"), 500);
    }
}
