//! Random MDP instances for property and oracle tests.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::graph::partition_states;
use crate::mdp::{Mdp, MdpBuilder};

pub const DISCOUNTS: [f64; 4] = [0.5, 0.7, 0.9, 0.95];

#[derive(Clone, Debug)]
pub struct RandomMdpOptions {
    /// Total states, targets included; at least 2.
    pub max_states: usize,
    pub max_actions: usize,
    pub deterministic: bool,
    pub max_cost: u32,
}

impl Default for RandomMdpOptions {
    fn default() -> Self {
        RandomMdpOptions {
            max_states: 6,
            max_actions: 3,
            deterministic: false,
            max_cost: 4,
        }
    }
}

/// Draws an instance whose initial state can reach a target. Without
/// `deterministic`, at least one action has a random successor. Probabilities
/// are small-integer ratios, costs are integers and costs on targets and on
/// states that cannot reach a target are zero.
pub fn random_mdp<R: Rng + ?Sized>(rng: &mut R, opts: &RandomMdpOptions) -> Mdp {
    loop {
        if let Some(m) = attempt(rng, opts) {
            return m;
        }
    }
}

fn attempt<R: Rng + ?Sized>(rng: &mut R, opts: &RandomMdpOptions) -> Option<Mdp> {
    let n = rng.random_range(2..=opts.max_states.max(2));
    let targets = if n > 3 && rng.random_bool(0.3) { 2 } else { 1 };
    let beta = *DISCOUNTS.choose(rng).expect("nonempty");
    let mut b = MdpBuilder::new(beta);
    let ids: Vec<usize> = (1..=n).map(|i| b.add_state(format!("s{i}"))).collect();
    for (i, &s) in ids.iter().enumerate() {
        if i >= n - targets {
            b.add_action(s, "stay", &[(s, 1.0)], 0.0);
            b.target(s);
            continue;
        }
        for a in 0..rng.random_range(1..=opts.max_actions.max(1)) {
            let succ: Vec<(usize, f64)> = if opts.deterministic {
                vec![(ids[rng.random_range(0..n)], 1.0)]
            } else {
                let k = rng.random_range(1..=3.min(n));
                let weights: Vec<(usize, u32)> = (0..k)
                    .map(|_| (ids[rng.random_range(0..n)], rng.random_range(1..=4)))
                    .collect();
                let total: u32 = weights.iter().map(|w| w.1).sum();
                weights
                    .into_iter()
                    .map(|(t, w)| (t, w as f64 / total as f64))
                    .collect()
            };
            let cost = rng.random_range(0..=opts.max_cost) as f64;
            b.add_action(s, format!("a{}", a + 1), &succ, cost);
        }
    }
    b.initial(ids[0]);
    let m = b.build().ok()?;
    if !opts.deterministic && m.has_deterministic_transitions() {
        return None;
    }
    let part = partition_states(&m);
    if !part.is_rest(m.initial()) {
        return None;
    }
    let costs = (0..n)
        .map(|s| {
            (0..m.num_actions(s))
                .map(|a| if part.is_rest(s) { m.cost(s, a) } else { 0.0 })
                .collect()
        })
        .collect();
    m.with_costs(costs).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn instances_are_valid_and_reachable() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for deterministic in [false, true] {
            let opts = RandomMdpOptions { deterministic, ..Default::default() };
            for _ in 0..50 {
                let m = random_mdp(&mut rng, &opts);
                assert!(m.validate().is_empty());
                assert!(m.num_states() <= 6);
                let part = partition_states(&m);
                assert!(part.is_rest(m.initial()));
                for s in 0..m.num_states() {
                    if !part.is_rest(s) {
                        assert!(m.costs()[s].iter().all(|&c| c == 0.0));
                    }
                }
                assert_eq!(m.has_deterministic_transitions(), deterministic);
            }
        }
    }

    #[test]
    fn seeded_generation_repeats() {
        let opts = RandomMdpOptions::default();
        let a = random_mdp(&mut ChaCha8Rng::seed_from_u64(9), &opts);
        let b = random_mdp(&mut ChaCha8Rng::seed_from_u64(9), &opts);
        assert_eq!(a, b);
    }
}
