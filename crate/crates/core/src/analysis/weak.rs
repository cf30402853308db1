//! Monte Carlo comparison of `E⟨u_t, φ⟩` between the full and averaged models.

use std::fmt::Write as _;

use rand::Rng;

use crate::field::{pair_values, TestFunction};
use crate::hybrid::{num, run_ensemble_from, Engine, ModelKind, SimConfig};
use crate::kinetics::KineticScheme;

use super::stats::mean_stderr;
use super::AnalysisError;

#[derive(Debug, Clone, PartialEq)]
pub struct WeakRow {
    /// `None` for the averaged model.
    pub eps: Option<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakReport {
    pub t_star: f64,
    pub averaged: WeakRow,
    pub full: Vec<WeakRow>,
}

impl WeakReport {
    /// `|E⟨u^ε, φ⟩ - E⟨u, φ⟩|` and its pooled standard error per rung.
    pub fn differences(&self) -> Vec<(f64, f64, f64)> {
        self.full
            .iter()
            .map(|r| {
                let pooled = (r.stderr.powi(2) + self.averaged.stderr.powi(2)).sqrt();
                (
                    r.eps.unwrap_or(f64::NAN),
                    (r.mean - self.averaged.mean).abs(),
                    pooled,
                )
            })
            .collect()
    }

    /// Whether the last rung's difference is within `k` pooled errors of 0.
    pub fn overlaps(&self, k: f64) -> bool {
        self.differences()
            .last()
            .is_some_and(|&(_, d, se)| d <= k * se)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,eps,mean,stderr,n\n");
        let _ = writeln!(
            out,
            "averaged,,{},{},{}",
            num(self.averaged.mean),
            num(self.averaged.stderr),
            self.averaged.n
        );
        for r in &self.full {
            let _ = writeln!(
                out,
                "full,{},{},{},{}",
                num(r.eps.unwrap_or(f64::NAN)),
                num(r.mean),
                num(r.stderr),
                r.n
            );
        }
        out
    }
}

/// `⟨u_{t*}, φ⟩` of one run.
pub fn pairing_at<R: Rng + ?Sized>(
    scheme: &KineticScheme,
    cfg: &SimConfig,
    phi: &TestFunction,
    t_star: f64,
    rng: &mut R,
) -> Result<f64, AnalysisError> {
    let mut engine = Engine::new(scheme, cfg, rng)?;
    let steps = (t_star / cfg.dt).round() as usize;
    while engine.step_index() < steps {
        engine.step(rng);
    }
    Ok(pair_values(engine.values(), engine.grid(), phi))
}

fn same_discretisation(a: &SimConfig, b: &SimConfig) -> bool {
    a.n == b.n
        && a.m == b.m
        && a.dt == b.dt
        && a.k_diff == b.k_diff
        && a.input == b.input
        && a.u0 == b.u0
        && a.frozen_potential == b.frozen_potential
}

/// Ensemble means of `⟨u_{t*}, φ⟩` for each full config and the averaged one.
///
/// Group `g` (averaged first, then the full configs in order), member `m`
/// uses stream `g · ensemble + m` of `master`.
pub fn weak_compare(
    scheme: &KineticScheme,
    full: &[SimConfig],
    averaged: &SimConfig,
    phi: &TestFunction,
    t_star: f64,
    ensemble: usize,
    master: u64,
) -> Result<WeakReport, AnalysisError> {
    if ensemble < 2 {
        return Err(AnalysisError::InsufficientEnsemble {
            size: ensemble,
            min: 2,
        });
    }
    if averaged.model != ModelKind::Averaged || full.iter().any(|c| c.model != ModelKind::Full) {
        return Err(AnalysisError::WrongModel(
            "expected full-model configs and one averaged config".into(),
        ));
    }
    for c in full {
        if !same_discretisation(c, averaged) {
            return Err(AnalysisError::Mismatch(
                "all configs must share N, M, dt, diffusion, input and u0".into(),
            ));
        }
    }
    for c in full.iter().chain(std::iter::once(averaged)) {
        let steps = t_star / c.dt;
        if !(t_star > 0.0 && t_star <= c.t_end * (1.0 + 1e-12))
            || (steps - steps.round()).abs() > 1e-6
        {
            return Err(AnalysisError::Mismatch(format!(
                "t* = {t_star} must be a positive multiple of dt inside [0, T]"
            )));
        }
    }
    let group = |g: usize, cfg: &SimConfig| -> Result<WeakRow, AnalysisError> {
        let xs: Vec<Result<f64, AnalysisError>> =
            run_ensemble_from(ensemble, master, (g * ensemble) as u64, |_, rng| {
                pairing_at(scheme, cfg, phi, t_star, rng)
            });
        let xs: Vec<f64> = xs.into_iter().collect::<Result<_, _>>()?;
        let (mean, stderr) = mean_stderr(&xs);
        Ok(WeakRow {
            eps: (cfg.model == ModelKind::Full).then_some(cfg.eps),
            mean,
            stderr,
            n: ensemble,
        })
    };
    let averaged_row = group(0, averaged)?;
    let full_rows = full
        .iter()
        .enumerate()
        .map(|(k, c)| group(k + 1, c))
        .collect::<Result<_, _>>()?;
    Ok(WeakReport {
        t_star,
        averaged: averaged_row,
        full: full_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::common_dt;
    use crate::hybrid::InitialProfile;

    fn cfgs(name: &str, s: &KineticScheme) -> (Vec<SimConfig>, SimConfig) {
        let mut base = SimConfig::new(name, ModelKind::Full);
        base.n = 4;
        base.m = 8;
        base.t_end = 0.5;
        base.u0 = InitialProfile::Sine(0.5);
        let mut all = vec![
            SimConfig {
                eps: 0.5,
                ..base.clone()
            },
            SimConfig {
                eps: 0.1,
                ..base.clone()
            },
            SimConfig {
                model: ModelKind::Averaged,
                ..base
            },
        ];
        common_dt(s, &mut all).unwrap();
        let avg = all.pop().unwrap();
        (all, avg)
    }

    #[test]
    fn degenerate_scheme_has_no_difference() {
        let s = KineticScheme::shared2();
        let (full, avg) = cfgs("shared2", &s);
        let r = weak_compare(&s, &full, &avg, &TestFunction::sine(), 0.5, 10, 1).unwrap();
        for (_, d, _) in r.differences() {
            assert!(d < 1e-12, "{d}");
        }
        assert!(r.overlaps(3.0));
    }

    #[test]
    fn mismatch_rejected() {
        let s = KineticScheme::toy2();
        let (mut full, avg) = cfgs("toy2", &s);
        full[0].dt /= 2.0;
        assert!(matches!(
            weak_compare(&s, &full, &avg, &TestFunction::sine(), 0.5, 10, 1),
            Err(AnalysisError::Mismatch(_))
        ));
    }
}
