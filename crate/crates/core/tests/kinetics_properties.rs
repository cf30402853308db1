use pdmp_axon::kinetics::{stationary_distribution, GeneratorMatrix, KineticScheme, RateFunction};
use proptest::prelude::*;

fn assert_generator(g: &GeneratorMatrix) {
    let d = g.dim();
    for i in 0..d {
        for j in 0..d {
            if i != j {
                assert!(g.get(i, j) >= 0.0);
            }
        }
        let s: f64 = g.row(i).iter().sum();
        assert!(s.abs() < 1e-12, "row {i} sums to {s:e}");
    }
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generators_are_conservative(v in -50.0f64..200.0, eps in 1e-3f64..1.0) {
        let na = KineticScheme::na8();
        assert_generator(&na.full_generator(v, eps).unwrap());
        assert_generator(&na.aggregated_generator(v).unwrap());
        for j in 0..na.n_classes() {
            assert_generator(&na.class_generator(j, v).unwrap());
        }
    }

    #[test]
    fn class_laws_balance(v in -20.0f64..140.0) {
        let na = KineticScheme::na8();
        for j in 0..na.n_classes() {
            let b = na.class_generator(j, v).unwrap();
            let mu = stationary_distribution(&b).unwrap();
            prop_assert!(b.balance_residual(&mu) < 1e-10);
            prop_assert!((mu.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregated_is_the_h_gate(v in -20.0f64..140.0) {
        let g = KineticScheme::na8().aggregated_generator(v).unwrap();
        let (ah, bh) = (RateFunction::AlphaH.eval(v), RateFunction::BetaH.eval(v));
        let want = [-ah, ah, bh, -bh];
        for (a, b) in g.entries().iter().zip(want) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_law_is_lipschitz(v in -20.0f64..140.0, dv in -5.0f64..5.0) {
        // the steepest voltage sensitivity of any gate rate is below 0.3 / mV
        // relative, so 1.0 per mV in L1 is a generous finite constant
        let na = KineticScheme::na8();
        let w = (v + dv).clamp(-20.0, 140.0);
        prop_assume!((w - v).abs() > 1e-9);
        let a = stationary_distribution(&na.full_generator(v, 1.0).unwrap()).unwrap();
        let b = stationary_distribution(&na.full_generator(w, 1.0).unwrap()).unwrap();
        prop_assert!(l1(a.probs(), b.probs()) <= 1.0 * (w - v).abs());
    }
}

#[test]
fn fitted_lipschitz_constant_is_finite() {
    let na = KineticScheme::na8();
    let grid: Vec<f64> = (0..=1600).map(|k| -20.0 + 0.1 * k as f64).collect();
    let laws: Vec<Vec<f64>> = grid
        .iter()
        .map(|&v| {
            stationary_distribution(&na.full_generator(v, 1.0).unwrap())
                .unwrap()
                .into_probs()
        })
        .collect();
    let l = laws
        .windows(2)
        .map(|w| l1(&w[0], &w[1]) / 0.1)
        .fold(0.0f64, f64::max);
    assert!(l.is_finite() && l > 0.0 && l < 1.0, "L = {l}");
}
