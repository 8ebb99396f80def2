use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reachsynth::random::{random_mdp, RandomMdpOptions};
use reachsynth::*;

#[test]
fn exact_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..40 {
        let opts = RandomMdpOptions {
            max_states: 6,
            deterministic: case % 2 == 0,
            ..Default::default()
        };
        let m = random_mdp(&mut rng, &opts);
        let oracle = brute_force_oracle(&m).unwrap();
        let exact = solve_exact(&m, &ExactOptions::default()).unwrap();
        assert!(
            (exact.cost - oracle.cost).abs() <= 1e-5,
            "case {case}: exact {} oracle {}\n{}",
            exact.cost,
            oracle.cost,
            write_mdp(&m)
        );
        assert!((exact.reach - oracle.x_initial).abs() <= 1e-6, "case {case}");
    }
}

#[test]
fn certified_big_m_covers_every_feasible_policy() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let opts = RandomMdpOptions {
        max_states: 6,
        deterministic: true,
        ..Default::default()
    };
    for _ in 0..40 {
        let m = random_mdp(&mut rng, &opts);
        let oracle = brute_force_oracle(&m).unwrap();
        assert!(oracle.max_rest_steps() <= m.num_states() as f64 + 1e-9);
    }
}

#[test]
fn approx_sits_between_exact_and_surrogate() {
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    for case in 0..30 {
        let opts = RandomMdpOptions {
            max_states: 6,
            deterministic: case % 2 == 0,
            ..Default::default()
        };
        let m = random_mdp(&mut rng, &opts);
        let oracle = brute_force_oracle(&m).unwrap();
        let a = synth_approx(&m, &ApproxOptions::default()).unwrap();
        assert!(a.cost >= oracle.cost - 1e-6, "case {case}");
        assert!(a.cost <= a.surrogate + 1e-6, "case {case}");
    }
}
