use pdmp_axon::field::{pair_reaction_averaged, pair_reaction_full, Field, TestFunction};
use pdmp_axon::hybrid::{
    aggregate_path, member_rng, run_ensemble, simulate, total_rate, AggregatedConfig,
    ChannelConfig, HybridTrajectory, InitialProfile, ModelKind, SimConfig,
};
use pdmp_axon::kinetics::{na_diffusion, KineticScheme, NA_REVERSAL};
use rand::Rng;

fn frozen(model: ModelKind, n: usize, v: f64, eps: f64, t_end: f64) -> SimConfig {
    let mut cfg = SimConfig::new("na8", model);
    cfg.n = n;
    cfg.m = n;
    cfg.eps = eps;
    cfg.t_end = t_end;
    cfg.u0 = InitialProfile::Constant(v);
    cfg.frozen_potential = true;
    cfg.snapshot_stride = usize::MAX / 2;
    cfg
}

#[test]
fn first_jump_time_has_mean_one_over_total_rate() {
    let na = KineticScheme::na8();
    let mut pick = member_rng(100, 0);
    for case in 0..10 {
        let n = pick.random_range(2..8);
        let v = pick.random_range(0.0..NA_REVERSAL);
        let eps = [1.0, 0.3, 0.1][case % 3];
        let q0: Vec<usize> = (0..n - 1)
            .map(|_| pick.random_range(0..na.n_states()))
            .collect();
        let mut cfg = frozen(ModelKind::Full, n, v, eps, 1.0);
        cfg.q0 = Some(q0.clone());
        let grid = cfg.grid().unwrap();
        let u = Field::from_fn(grid, |x| cfg.u0.value(x));
        let lambda = total_rate(&na, &u, &ChannelConfig::new(&na, q0).unwrap(), eps).unwrap();
        cfg.t_end = 30.0 / lambda;
        let cfg = cfg.with_admissible_dt(&na).unwrap();
        let runs = 2000;
        let firsts = run_ensemble(runs, 7 + case as u64, |_, rng| {
            simulate(&na, &cfg, rng)
                .unwrap()
                .jumps
                .first()
                .map(|j| j.time)
        });
        let times: Vec<f64> = firsts
            .into_iter()
            .map(|t| t.expect("a jump within 30 mean times"))
            .collect();
        let mean = times.iter().sum::<f64>() / runs as f64;
        // exponential: sd = mean
        let se = 1.0 / (lambda * (runs as f64).sqrt());
        assert!(
            (mean - 1.0 / lambda).abs() < 3.0 * se,
            "case {case}: mean first jump {mean}, 1/Lambda = {}",
            1.0 / lambda
        );
    }
}

fn split_counts(na: &KineticScheme, t: &HybridTrajectory) -> (usize, usize) {
    let within = t
        .jumps
        .iter()
        .filter(|j| na.class_of(j.from) == na.class_of(j.to))
        .count();
    (within, t.jumps.len() - within)
}

#[test]
fn activity_scales_with_inverse_eps() {
    let na = KineticScheme::na8();
    let run = |eps: f64| {
        let cfg = frozen(ModelKind::Full, 11, 20.0, eps, 200.0)
            .with_admissible_dt(&na)
            .unwrap();
        split_counts(
            &na,
            &simulate(&na, &cfg, &mut member_rng(5, (eps * 100.0) as u64)).unwrap(),
        )
    };
    let (w1, b1) = run(1.0);
    let (w2, b2) = run(0.1);
    let ratio = w2 as f64 / w1 as f64;
    assert!(
        (ratio - 10.0).abs() <= 1.0,
        "within-class ratio {ratio} ({w1} -> {w2})"
    );
    let sigma = ((b1 + b2) as f64).sqrt();
    assert!(
        (b1 as f64 - b2 as f64).abs() <= 3.0 * sigma,
        "between-class counts {b1} vs {b2}"
    );
}

#[test]
fn averaged_labels_switch_at_the_h_gate_rates() {
    let na = KineticScheme::na8();
    let v = 20.0;
    let cfg = frozen(ModelKind::Averaged, 11, v, 1.0, 2000.0)
        .with_admissible_dt(&na)
        .unwrap();
    let t = simulate(&na, &cfg, &mut member_rng(3, 0)).unwrap();
    let mut labels = t.initial.clone();
    let mut last = vec![0.0; labels.len()];
    let mut time_in = [0.0f64; 2];
    let mut flips = [0usize; 2];
    for j in &t.jumps {
        time_in[labels[j.channel]] += j.time - last[j.channel];
        last[j.channel] = j.time;
        flips[j.from] += 1;
        labels[j.channel] = j.to;
    }
    for (c, &l) in labels.iter().enumerate() {
        time_in[l] += cfg.t_end - last[c];
    }
    let g = na.aggregated_generator(v).unwrap();
    for class in 0..2 {
        let rate = -g.get(class, class);
        let expected = rate * time_in[class];
        let got = flips[class] as f64;
        assert!(
            (got - expected).abs() <= 3.0 * expected.sqrt(),
            "class {class}: {got} exits, expected {expected}"
        );
    }
}

#[test]
fn frozen_defect_integrand_averages_to_zero() {
    let na = KineticScheme::na8();
    let v = 40.0;
    let cfg = frozen(ModelKind::Full, 6, v, 0.2, 4000.0)
        .with_admissible_dt(&na)
        .unwrap();
    let t = simulate(&na, &cfg, &mut member_rng(11, 0)).unwrap();
    let u = Field::from_fn(t.grid, |x| cfg.u0.value(x));
    let phi = TestFunction::sine();
    let integrand = |states: &[usize]| {
        let r = ChannelConfig::new(&na, states.to_vec()).unwrap();
        let labels = states.iter().map(|&s| na.class_of(s)).collect();
        let rbar = AggregatedConfig::new(&na, labels).unwrap();
        pair_reaction_full(&na, &r, &u, &phi).unwrap()
            - pair_reaction_averaged(&na, &rbar, &u, &phi).unwrap()
    };
    let batches = 20;
    let width = cfg.t_end / batches as f64;
    let mut sums = vec![0.0; batches];
    let mut states = t.initial.clone();
    let mut now = 0.0;
    let add = |from: f64, to: f64, value: f64, sums: &mut Vec<f64>| {
        let mut a = from;
        while a < to {
            let k = ((a / width) as usize).min(batches - 1);
            let b = to.min((k + 1) as f64 * width);
            sums[k] += value * (b - a);
            a = b;
        }
    };
    for j in &t.jumps {
        add(now, j.time, integrand(&states), &mut sums);
        now = j.time;
        states[j.channel] = j.to;
    }
    add(now, cfg.t_end, integrand(&states), &mut sums);
    let means: Vec<f64> = sums.iter().map(|s| s / width).collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    let se = (var / batches as f64).sqrt();
    assert!(se > 0.0);
    assert!(m.abs() < 3.0 * se, "time average {m} +- {se}");
}

fn na_run(model: ModelKind, eps: f64) -> SimConfig {
    let mut cfg = SimConfig::new("na8", model);
    cfg.n = 20;
    cfg.m = 40;
    cfg.eps = eps;
    cfg.t_end = 3.0;
    cfg.k_diff = na_diffusion();
    cfg.u0 = InitialProfile::Sine(NA_REVERSAL);
    cfg.snapshot_stride = 1;
    cfg.with_admissible_dt(&KineticScheme::na8()).unwrap()
}

#[test]
fn averaged_model_obeys_the_maximum_principle() {
    let na = KineticScheme::na8();
    let cfg = na_run(ModelKind::Averaged, 1.0);
    for seed in 0..5 {
        let t = simulate(&na, &cfg, &mut member_rng(seed, 0)).unwrap();
        for s in &t.snapshots {
            assert!(s.values.iter().all(|u| (0.0..=NA_REVERSAL).contains(u)));
        }
    }
}

#[test]
fn h1_norm_has_an_eps_uniform_bound() {
    let na = KineticScheme::na8();
    let peak = |eps: f64| {
        let cfg = na_run(ModelKind::Full, eps);
        (0..4)
            .map(|seed| {
                let t = simulate(&na, &cfg, &mut member_rng(seed, 0)).unwrap();
                (0..t.snapshots.len())
                    .map(|k| t.field(k).h1_norm())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max)
    };
    let norms: Vec<f64> = [1.0, 0.5, 0.1].iter().map(|&e| peak(e)).collect();
    // a function with values in [0, 115] and one channel-scale kink per site
    // has H1 norm far below 1e5; the bound must not grow as eps shrinks
    assert!(norms.iter().all(|n| n.is_finite() && *n < 1e5), "{norms:?}");
    assert!(
        norms[2] <= 1.5 * norms[0] && norms[1] <= 1.5 * norms[0],
        "{norms:?}"
    );
}

#[test]
fn trajectories_are_reproducible_and_aggregation_shrinks() {
    let na = KineticScheme::na8();
    for model in [ModelKind::Full, ModelKind::Averaged] {
        let cfg = na_run(model, 0.1);
        let a = simulate(&na, &cfg, &mut member_rng(21, 4)).unwrap();
        let b = simulate(&na, &cfg, &mut member_rng(21, 4)).unwrap();
        assert_eq!(a.snapshots, b.snapshots);
        assert_eq!(a.jumps, b.jumps);
        assert!(a.jumps.windows(2).all(|w| w[0].time < w[1].time));
        if model == ModelKind::Full {
            let agg = aggregate_path(&na, &a).unwrap();
            assert!(agg.jumps.len() <= a.jumps.len());
        }
    }
}
