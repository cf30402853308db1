use pdmp_axon::field::{
    fd_step, pair_reaction_averaged, pair_reaction_full, reaction_full, Field, Grid, TestFunction,
};
use pdmp_axon::hybrid::{member_rng, AggregatedConfig, ChannelConfig};
use pdmp_axon::kinetics::{na_diffusion, KineticScheme, NA_REVERSAL};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fd_step_keeps_na_potential_in_range(
        n in 2usize..12,
        refine in 1usize..4,
        k_diff in prop_oneof![Just(na_diffusion()), 1e-4f64..1.0],
        seed in any::<u64>(),
    ) {
        let na = KineticScheme::na8();
        let grid = Grid::new(n * refine, n).unwrap();
        let mut rng = member_rng(seed, 0);
        let values: Vec<f64> = (0..grid.nodes())
            .map(|q| if q == 0 || q == grid.cells() { 0.0 } else { rng.random::<f64>() * NA_REVERSAL })
            .collect();
        let mut u = Field::new(grid, values, 0.0).unwrap();
        let states: Vec<usize> = (0..grid.channels()).map(|_| rng.random_range(0..na.n_states())).collect();
        let r = ChannelConfig::new(&na, states).unwrap();
        let h = grid.h();
        let dt = 1.0 / (2.0 * k_diff / (h * h) + na.max_conductance() / (n as f64 * h));
        for _ in 0..20 {
            let src = reaction_full(&na, &r, &u).unwrap();
            u = fd_step(&u, &src, k_diff, dt).unwrap();
            prop_assert_eq!(u.values()[0], 0.0);
            prop_assert_eq!(u.values()[grid.cells()], 0.0);
            for &x in u.values() {
                prop_assert!((0.0..=NA_REVERSAL).contains(&x), "u = {}", x);
            }
        }
    }
}

/// Draws each channel from the quasi-stationary law of its label at the
/// local potential.
fn draw_given_labels<R: Rng>(
    s: &KineticScheme,
    labels: &[usize],
    u: &Field,
    rng: &mut R,
) -> ChannelConfig {
    let states = labels
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let mu = s.quasi_stationary(j, u.at_channel(i)).unwrap();
            let members = s.class_members(j).unwrap();
            let mut x = rng.random::<f64>();
            for (k, p) in mu.probs().iter().enumerate() {
                if x < *p {
                    return members[k];
                }
                x -= p;
            }
            *members.last().unwrap()
        })
        .collect();
    ChannelConfig::new(s, states).unwrap()
}

fn monte_carlo_matches_average(s: &KineticScheme, labels: Vec<usize>, u: &Field, seed: u64) {
    let phi = TestFunction::sine();
    let rbar = AggregatedConfig::new(s, labels.clone()).unwrap();
    let target = pair_reaction_averaged(s, &rbar, u, &phi).unwrap();
    let mut rng = member_rng(seed, 0);
    let draws = 100_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..draws {
        let r = draw_given_labels(s, &labels, u, &mut rng);
        let g = pair_reaction_full(s, &r, u, &phi).unwrap();
        sum += g;
        sq += g * g;
    }
    let mean = sum / draws as f64;
    let se = ((sq / draws as f64 - mean * mean) / (draws - 1) as f64).sqrt();
    assert!(
        (mean - target).abs() <= 3.0 * se.max(1e-15),
        "E<G_r, phi> = {mean} +- {se}, <F, phi> = {target}"
    );
}

#[test]
fn averaged_reaction_is_the_mean_of_the_full_one() {
    let toy = KineticScheme::toy2();
    let grid = Grid::new(10, 5).unwrap();
    let u = Field::from_fn(grid, |x| 2.0 * x - 0.3);
    monte_carlo_matches_average(&toy, vec![0; 4], &u, 1);

    let na = KineticScheme::na8();
    let grid = Grid::new(12, 4).unwrap();
    // high potential so the open state carries visible mass
    let u = Field::from_fn(grid, |x| 60.0 + 40.0 * (std::f64::consts::PI * x).sin());
    monte_carlo_matches_average(&na, vec![1, 0, 1], &u, 2);
}
