use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reachsynth::approx::surrogate_value;
use reachsynth::discount::{optimal_values_with, DiscountBackend};
use reachsynth::graph::StateClass;
use reachsynth::random::{random_mdp, RandomMdpOptions};
use reachsynth::*;

fn instance(seed: u64, deterministic: bool, max_states: usize) -> Mdp {
    let opts = RandomMdpOptions {
        max_states,
        deterministic,
        ..Default::default()
    };
    random_mdp(&mut ChaCha8Rng::seed_from_u64(seed), &opts)
}

fn random_policy(m: &Mdp, seed: u64) -> StationaryPolicy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..m.num_states())
        .map(|s| {
            let w: Vec<f64> = (0..m.num_actions(s)).map(|_| rng.random_range(0.0..1.0) + 1e-3).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|x| x / total).collect()
        })
        .collect();
    StationaryPolicy::from_rows(rows)
}

fn y_initial(m: &Mdp) -> f64 {
    let ra = max_reach(m).unwrap();
    optimal_values(&cleanup(m, &ra).unwrap()).unwrap().y[m.initial()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn partition_is_stable(seed in any::<u64>(), det in any::<bool>()) {
        let m = instance(seed, det, 8);
        let p = partition_states(&m);
        prop_assert_eq!(&p, &partition_states(&m));
        let ra = max_reach(&m).unwrap();
        let q = partition_states(&cleanup(&m, &ra).unwrap());
        for s in 0..m.num_states() {
            prop_assert_eq!(p.class(s) == StateClass::Rest, q.class(s) == StateClass::Rest);
            prop_assert_eq!(p.class(s), q.class(s));
        }
        prop_assert_eq!(p.tmin(m.initial()), Some(1));
    }

    #[test]
    fn reachable_set_is_closed(seed in any::<u64>(), pseed in any::<u64>()) {
        let m = instance(seed, false, 8);
        let pol = random_policy(&m, pseed);
        let r = reachable_states(&m, &pol).unwrap();
        prop_assert!(r.contains(&m.initial()));
        for &s in &r {
            for (a, &pa) in pol.row(s).iter().enumerate() {
                if pa > 0.0 {
                    for &(t, p) in m.transitions(s, a) {
                        prop_assert!(p == 0.0 || r.contains(&t));
                    }
                }
            }
        }
    }

    #[test]
    fn reach_never_exceeds_maximum(seed in any::<u64>(), pseed in any::<u64>(), det in any::<bool>()) {
        let m = instance(seed, det, 8);
        let ra = max_reach(&m).unwrap();
        let pol = random_policy(&m, pseed);
        prop_assert!(reach_prob(&m, &pol).unwrap() <= ra.x[m.initial()] + 1e-6);
        let again = max_reach(&cleanup(&m, &ra).unwrap()).unwrap();
        for s in 0..m.num_states() {
            prop_assert!((again.x[s] - ra.x[s]).abs() <= 1e-7);
        }
    }

    #[test]
    fn discount_backends_agree(seed in any::<u64>(), det in any::<bool>()) {
        let m = instance(seed, det, 8);
        let vi = optimal_values_with(&m, DiscountBackend::ValueIteration).unwrap();
        let lp = optimal_values_with(&m, DiscountBackend::LinearProgram).unwrap();
        for s in 0..m.num_states() {
            prop_assert!((vi.y[s] - lp.y[s]).abs() <= 1e-6, "{} vs {}", vi.y[s], lp.y[s]);
        }
    }

    #[test]
    fn pitilde_attains_infimum_on_cleanup(seed in any::<u64>(), det in any::<bool>()) {
        let m = instance(seed, det, 8);
        let ra = max_reach(&m).unwrap();
        let mp = cleanup(&m, &ra).unwrap();
        let da = optimal_values(&mp).unwrap();
        let j = evaluate_cost(&mp, &da.pitilde).unwrap();
        prop_assert!((j - da.y[m.initial()]).abs() <= 1e-6);
    }

    #[test]
    fn eps_policy_is_feasible_and_near_optimal(seed in any::<u64>(), det in any::<bool>(), k in 0usize..3) {
        let eps = [0.1, 0.01, 0.001][k];
        let m = instance(seed, det, 8);
        let r = synth_eps_optimal(&m, eps).unwrap();
        let x = max_reach(&m).unwrap().x[m.initial()];
        prop_assert!((reach_prob(&m, &r.policy).unwrap() - x).abs() <= 1e-6);
        let y = y_initial(&m);
        let j = evaluate_cost(&m, &r.policy).unwrap();
        prop_assert!(j - y <= eps + 1e-6);
        prop_assert!(j >= y - 1e-6);
    }

    #[test]
    fn existence_is_sound(seed in any::<u64>(), det in any::<bool>()) {
        let m = instance(seed, det, 5);
        let c = check_existence(&m).unwrap();
        for s in 0..m.num_states() {
            prop_assert!(c.xbar[s] <= c.x[s] + 1e-6);
        }
        if let Some(w) = &c.witness {
            prop_assert!((reach_prob(&m, w).unwrap() - c.x[m.initial()]).abs() <= 1e-6);
            prop_assert!((evaluate_cost(&m, w).unwrap() - y_initial(&m)).abs() <= 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn synthesis_methods_are_ordered(seed in any::<u64>(), det in any::<bool>()) {
        let m = instance(seed, det, 6);
        let x = max_reach(&m).unwrap().x[m.initial()];
        let y = y_initial(&m);
        let eps = 0.01;
        let je = evaluate_cost(&m, &synth_eps_optimal(&m, eps).unwrap().policy).unwrap();
        let exact = solve_exact(&m, &ExactOptions::default()).unwrap();
        let jx = evaluate_cost(&m, &exact.policy).unwrap();
        let approx = synth_approx(&m, &ApproxOptions::default()).unwrap();
        let ja = evaluate_cost(&m, &approx.policy).unwrap();
        prop_assert!(je <= y + eps + 1e-6);
        prop_assert!(jx >= y - 1e-6);
        prop_assert!(exact.milp_objective >= y - 1e-6);
        prop_assert!(ja >= jx - 1e-6, "approx {} exact {}", ja, jx);
        prop_assert!((exact.reach - x).abs() <= 1e-6);
    }

    #[test]
    fn approx_extraction_is_optimal_for_surrogate(seed in any::<u64>(), det in any::<bool>()) {
        let m = instance(seed, det, 6);
        let a = synth_approx(&m, &ApproxOptions::default()).unwrap();
        let x = max_reach(&m).unwrap().x[m.initial()];
        prop_assert!((reach_prob(&m, &a.policy).unwrap() - x).abs() <= 1e-6);
        let jt = surrogate_value(&m, &a.policy, &a.costs.table).unwrap();
        prop_assert!((jt - a.v_star).abs() <= 1e-6, "{} vs {}", jt, a.v_star);
        let j = evaluate_cost(&m, &a.policy).unwrap();
        prop_assert!(j <= jt + 1e-6);
        prop_assert!(a.certificate.discounted_lower_bound <= j + 1e-6);
    }

    #[test]
    fn surrogate_dominates_cost_for_feasible_policies(seed in any::<u64>(), det in any::<bool>()) {
        let m = instance(seed, det, 5);
        let a = synth_approx(&m, &ApproxOptions::default()).unwrap();
        let oracle = brute_force_oracle(&m).unwrap();
        for e in oracle.feasible() {
            let pol = StationaryPolicy::deterministic(&m, &e.choice);
            let jt = surrogate_value(&m, &pol, &a.costs.table).unwrap();
            prop_assert!(e.cost <= jt + 1e-6);
            prop_assert!(a.certificate.discounted_lower_bound <= e.cost + 1e-6);
        }
    }

    #[test]
    fn deterministic_gap_bound(seed in any::<u64>()) {
        let m = instance(seed, true, 6);
        let a = synth_approx(&m, &ApproxOptions::default()).unwrap();
        let e = solve_exact(&m, &ExactOptions::default()).unwrap();
        let ja = evaluate_cost(&m, &a.policy).unwrap();
        let jx = evaluate_cost(&m, &e.policy).unwrap();
        let bound = a.certificate.gap_bound_deterministic.unwrap();
        prop_assert!(ja - jx <= bound + 1e-6);
        prop_assert!(ja >= jx - 1e-6);
    }

    #[test]
    fn simulation_ignores_parallelism(seed in any::<u64>(), pseed in any::<u64>(), sim in any::<u64>()) {
        let m = instance(seed, false, 6);
        let pol = random_policy(&m, pseed);
        let opts = SimulationOptions { episodes: 300, horizon: 60, seed: sim, parallel: false };
        let a = simulate(&m, &pol, &opts).unwrap();
        let b = simulate(&m, &pol, &SimulationOptions { parallel: true, ..opts }).unwrap();
        prop_assert_eq!(a, b);
    }
}
