//! Voltage-dependent jump-rate functions.
//!
//! Voltages are in mV relative to rest, rates in ms⁻¹. The four gating
//! functions are the classical squid-axon sodium rates.

use std::fmt;
use std::str::FromStr;

use super::KineticsError;

/// Voltage box on which rate invariants (positivity, bounds) are sampled.
pub const VOLTAGE_BOX: (f64, f64) = (-50.0, 200.0);

/// Below this magnitude `w / (e^w - 1)` is evaluated from its Taylor series.
const SERIES_CUTOFF: f64 = 1e-4;

/// A single jump-rate function `v ↦ α(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateFunction {
    /// Sodium activation opening rate `0.1 (25 - v) / (e^{2.5 - 0.1 v} - 1)`.
    AlphaM,
    /// Sodium activation closing rate `4 e^{-v/18}`.
    BetaM,
    /// Sodium inactivation recovery rate `0.07 e^{-v/20}`.
    AlphaH,
    /// Sodium inactivation rate `1 / (e^{3 - 0.1 v} + 1)`.
    BetaH,
    /// Voltage-independent rate.
    Constant(f64),
    /// `scale · e^{v / slope}`.
    Exponential { scale: f64, slope: f64 },
}

/// `w / (e^w - 1)`, continuous through `w = 0`.
pub fn relative_expm1(w: f64) -> f64 {
    if w.abs() < SERIES_CUTOFF {
        1.0 - w / 2.0 + w * w / 12.0
    } else {
        w / w.exp_m1()
    }
}

impl RateFunction {
    /// Evaluates the rate at voltage `v` (mV).
    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        match *self {
            // 0.1 (25 - v) = 2.5 - 0.1 v = w
            RateFunction::AlphaM => relative_expm1(2.5 - 0.1 * v),
            RateFunction::BetaM => 4.0 * (-v / 18.0).exp(),
            RateFunction::AlphaH => 0.07 * (-v / 20.0).exp(),
            RateFunction::BetaH => 1.0 / ((3.0 - 0.1 * v).exp() + 1.0),
            RateFunction::Constant(c) => c,
            RateFunction::Exponential { scale, slope } => scale * (v / slope).exp(),
        }
    }

    /// Name used in scheme files.
    pub fn name(&self) -> String {
        match *self {
            RateFunction::AlphaM => "a_m".into(),
            RateFunction::BetaM => "b_m".into(),
            RateFunction::AlphaH => "a_h".into(),
            RateFunction::BetaH => "b_h".into(),
            RateFunction::Constant(c) => format!("const({c})"),
            RateFunction::Exponential { scale, slope } => format!("exp({scale},{slope})"),
        }
    }
}

impl fmt::Display for RateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for RateFunction {
    type Err = KineticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || KineticsError::Parse(format!("unknown rate function `{s}`"));
        match s {
            "a_m" => return Ok(RateFunction::AlphaM),
            "b_m" => return Ok(RateFunction::BetaM),
            "a_h" => return Ok(RateFunction::AlphaH),
            "b_h" => return Ok(RateFunction::BetaH),
            _ => {}
        }
        let (head, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match (head.trim(), nums.as_slice()) {
            ("const", [c]) if c.is_finite() && *c >= 0.0 => Ok(RateFunction::Constant(*c)),
            ("exp", [scale, slope]) if *scale > 0.0 && *slope != 0.0 => {
                Ok(RateFunction::Exponential {
                    scale: *scale,
                    slope: *slope,
                })
            }
            _ => Err(bad()),
        }
    }
}
