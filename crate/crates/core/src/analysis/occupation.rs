//! Frozen-voltage occupation statistics of a single channel.

use rand::Rng;
use rand_distr::{Distribution as _, Exp1};

use crate::kinetics::KineticScheme;

use super::AnalysisError;

#[derive(Debug, Clone, PartialEq)]
pub struct OccupationReport {
    /// Empirical occupation fractions over the members of the class.
    pub empirical: Vec<f64>,
    /// Quasi-stationary law of the class.
    pub expected: Vec<f64>,
    /// Total-variation distance between the two.
    pub tv: f64,
    /// Jumps simulated, all classes included.
    pub jumps: usize,
}

/// Exact jump-chain simulation of one channel at frozen voltage `v` with
/// within-class rates divided by `eps`, started in the first state of class
/// `j`. The run stops once `t_budget` time units have been spent inside
/// class `j`; excursions to other classes are not counted.
pub fn occupation_error<R: Rng + ?Sized>(
    scheme: &KineticScheme,
    j: usize,
    v: f64,
    eps: f64,
    t_budget: f64,
    rng: &mut R,
) -> Result<OccupationReport, AnalysisError> {
    let members = scheme.class_members(j)?;
    let expected = scheme.quasi_stationary(j, v)?.into_probs();
    if members.len() == 1 {
        return Ok(OccupationReport {
            empirical: vec![1.0],
            expected,
            tv: 0.0,
            jumps: 0,
        });
    }
    // per-state exits at v: (target, scaled rate)
    let exits: Vec<Vec<(usize, f64)>> = (0..scheme.n_states())
        .map(|s| {
            scheme
                .outgoing(s)
                .map(|t| {
                    let r = t.eval(v);
                    (
                        t.to,
                        if scheme.is_within_class(t) {
                            r / eps
                        } else {
                            r
                        },
                    )
                })
                .collect()
        })
        .collect();
    let totals: Vec<f64> = exits.iter().map(|e| e.iter().map(|x| x.1).sum()).collect();
    let mut occupied = vec![0.0; members.len()];
    let mut inside = 0.0;
    let mut state = members[0];
    let mut jumps = 0usize;
    while inside < t_budget {
        let total = totals[state];
        if !(total > 0.0) {
            return Err(AnalysisError::WrongModel(format!(
                "state {state} is absorbing at v = {v}"
            )));
        }
        let hold: f64 = Exp1.sample(rng);
        let hold = hold / total;
        if scheme.class_of(state) == j {
            let used = hold.min(t_budget - inside);
            occupied[scheme.position_in_class(state)] += used;
            inside += used;
            if inside >= t_budget {
                break;
            }
        }
        let mut u = rng.random::<f64>() * total;
        let mut next = exits[state].last().map_or(state, |x| x.0);
        for &(to, r) in &exits[state] {
            if u < r {
                next = to;
                break;
            }
            u -= r;
        }
        state = next;
        jumps += 1;
    }
    let empirical: Vec<f64> = occupied.iter().map(|t| t / inside).collect();
    let tv = 0.5
        * empirical
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    Ok(OccupationReport {
        empirical,
        expected,
        tv,
        jumps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::member_rng;

    #[test]
    fn singleton_class_is_exact() {
        let s = KineticScheme::new(
            "pair",
            vec!["a".into(), "b".into()],
            vec![0, 1],
            vec![
                crate::kinetics::Transition {
                    from: 0,
                    to: 1,
                    factor: 1.0,
                    rate: crate::kinetics::RateFunction::Constant(1.0),
                },
                crate::kinetics::Transition {
                    from: 1,
                    to: 0,
                    factor: 1.0,
                    rate: crate::kinetics::RateFunction::Constant(1.0),
                },
            ],
            vec![0.0; 2],
            vec![0.0; 2],
        )
        .unwrap();
        let r = occupation_error(&s, 1, 0.0, 0.1, 10.0, &mut member_rng(0, 0)).unwrap();
        assert_eq!(r.tv, 0.0);
    }

    #[test]
    fn two_state_occupation_converges() {
        let s = KineticScheme::toy2();
        let r = occupation_error(&s, 0, 0.0, 1.0, 1e4, &mut member_rng(1, 0)).unwrap();
        assert!(r.tv < 0.01, "{}", r.tv);
        assert!((r.expected[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn sodium_class_one() {
        let na = KineticScheme::na8();
        let r = occupation_error(&na, 1, 20.0, 0.01, 100.0, &mut member_rng(2, 0)).unwrap();
        assert!(r.tv < 0.02, "{}", r.tv);
        assert_eq!(r.empirical.len(), 4);
    }
}
