//! Mean-square averaging defect along a ladder of time-scale parameters.

use std::fmt::Write as _;

use crate::field::TestFunction;
use crate::hybrid::{num, run_ensemble_from, ModelKind, SimConfig};
use crate::kinetics::KineticScheme;

use super::defect::defect_at_horizon;
use super::stats::{mean_stderr, weighted_slope};
use super::AnalysisError;

/// Smallest ensemble accepted by [`epsilon_sweep`].
pub const MIN_ENSEMBLE: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    /// Mean of `|D(T)|²` over the ensemble.
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    /// First stream index used for this rung; members use consecutive streams.
    pub first_stream: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Weighted log-log slope and its standard error; `None` when degenerate.
    pub slope: Option<(f64, f64)>,
    /// Every mean is exactly 0.
    pub degenerate: bool,
    pub master_seed: u64,
    pub dt: f64,
}

impl SweepReport {
    /// Each mean is at most the previous one plus `k` pooled standard errors.
    pub fn is_decreasing(&self, k: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let pooled = (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            w[1].mean < w[0].mean + k * pooled
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,mean,stderr,n\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                num(r.eps),
                num(r.mean),
                num(r.stderr),
                r.n
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        if self.degenerate {
            out.push_str("degenerate: zero defect at every eps; slope undefined\n");
        }
        for r in &self.rows {
            let _ = writeln!(
                out,
                "eps = {:<8} mean |D(T)|^2 = {:.6e} +- {:.2e} (n = {})",
                r.eps, r.mean, r.stderr, r.n
            );
        }
        if let Some((b, se)) = self.slope {
            let _ = writeln!(out, "log-log slope = {b:.4} +- {se:.4}");
        }
        let _ = writeln!(
            out,
            "dt = {:e}, master seed = {}",
            self.dt, self.master_seed
        );
        out
    }
}

/// Sets every config's `dt` to the largest step admissible for all of them
/// (and dividing `T`).
pub fn common_dt(scheme: &KineticScheme, cfgs: &mut [SimConfig]) -> Result<f64, AnalysisError> {
    let mut dt = f64::INFINITY;
    for c in cfgs.iter() {
        dt = dt.min(c.clone().with_admissible_dt(scheme)?.dt);
    }
    for c in cfgs.iter_mut() {
        let steps = (c.t_end / dt).ceil();
        c.dt = c.t_end / steps;
    }
    Ok(cfgs.iter().map(|c| c.dt).fold(f64::INFINITY, f64::min))
}

/// For each `ε` of `ladder`, runs `ensemble` full-model members with the
/// common admissible step and reports the mean of `|D(T)|²`.
///
/// Rung `k`, member `m` uses stream `k · ensemble + m` of `base.seed`.
pub fn epsilon_sweep(
    scheme: &KineticScheme,
    base: &SimConfig,
    ladder: &[f64],
    ensemble: usize,
    phi: &TestFunction,
) -> Result<SweepReport, AnalysisError> {
    if ensemble < MIN_ENSEMBLE {
        return Err(AnalysisError::InsufficientEnsemble {
            size: ensemble,
            min: MIN_ENSEMBLE,
        });
    }
    if ladder.is_empty()
        || ladder.iter().any(|&e| !(1e-3..=1.0).contains(&e))
        || ladder.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(AnalysisError::InvalidLadder(format!(
            "{ladder:?}: need a strictly decreasing ladder inside [1e-3, 1]"
        )));
    }
    if base.model != ModelKind::Full {
        return Err(AnalysisError::WrongModel(
            "the sweep runs the full model".into(),
        ));
    }
    let mut cfgs: Vec<SimConfig> = ladder
        .iter()
        .map(|&eps| SimConfig {
            eps,
            ..base.clone()
        })
        .collect();
    let dt = common_dt(scheme, &mut cfgs)?;
    let mut rows = Vec::with_capacity(ladder.len());
    for (k, cfg) in cfgs.iter().enumerate() {
        let first = (k * ensemble) as u64;
        let sq: Vec<Result<f64, AnalysisError>> =
            run_ensemble_from(ensemble, base.seed, first, |_, rng| {
                defect_at_horizon(scheme, cfg, phi, rng).map(|d| d * d)
            });
        let sq: Vec<f64> = sq.into_iter().collect::<Result<_, _>>()?;
        let (mean, stderr) = mean_stderr(&sq);
        rows.push(SweepRow {
            eps: cfg.eps,
            mean,
            stderr,
            n: ensemble,
            first_stream: first,
        });
    }
    let degenerate = rows.iter().all(|r| r.mean == 0.0);
    let slope = if degenerate || rows.iter().any(|r| !(r.mean > 0.0)) {
        None
    } else {
        let x: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.mean.ln()).collect();
        // var(ln m) ≈ (se / m)²
        let w: Vec<f64> = rows
            .iter()
            .map(|r| {
                let rel = r.stderr / r.mean;
                if rel > 0.0 {
                    1.0 / (rel * rel)
                } else {
                    1.0
                }
            })
            .collect();
        let all_weighted = rows.iter().all(|r| r.stderr > 0.0);
        weighted_slope(&x, &y, all_weighted.then_some(w.as_slice()))
    };
    Ok(SweepReport {
        rows,
        slope,
        degenerate,
        master_seed: base.seed,
        dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(name: &str) -> SimConfig {
        let mut cfg = SimConfig::new(name, ModelKind::Full);
        cfg.n = 4;
        cfg.m = 8;
        cfg.t_end = 0.5;
        cfg
    }

    #[test]
    fn degenerate_scheme() {
        let s = KineticScheme::shared2();
        let r =
            epsilon_sweep(&s, &base("shared2"), &[0.5, 0.1], 10, &TestFunction::sine()).unwrap();
        assert!(r.degenerate);
        assert!(r.slope.is_none());
        assert!(r.summary().starts_with("degenerate"));
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = KineticScheme::toy2();
        let phi = TestFunction::sine();
        assert!(matches!(
            epsilon_sweep(&s, &base("toy2"), &[0.5, 0.1], 9, &phi),
            Err(AnalysisError::InsufficientEnsemble { .. })
        ));
        assert!(epsilon_sweep(&s, &base("toy2"), &[0.1, 0.5], 10, &phi).is_err());
        assert!(epsilon_sweep(&s, &base("toy2"), &[2.0, 0.5], 10, &phi).is_err());
        assert!(epsilon_sweep(&s, &base("toy2"), &[0.5, 1e-4], 10, &phi).is_err());
    }

    #[test]
    fn common_dt_is_shared() {
        let s = KineticScheme::toy2();
        let mut cfgs = vec![
            SimConfig {
                eps: 0.5,
                ..base("toy2")
            },
            SimConfig {
                eps: 0.05,
                ..base("toy2")
            },
        ];
        let dt = common_dt(&s, &mut cfgs).unwrap();
        assert_eq!(cfgs[0].dt, cfgs[1].dt);
        assert_eq!(dt, cfgs[0].dt);
        assert!(cfgs[1].validate(&s).is_ok());
    }
}
