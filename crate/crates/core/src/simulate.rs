//! Monte-Carlo estimates of reach probability and discounted cost.
//!
//! Episode `i` draws from its own ChaCha stream (`seed`, stream `i`), so the
//! result does not depend on whether episodes run in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::policy::StationaryPolicy;

#[derive(Clone, Debug)]
pub struct SimulationOptions {
    pub episodes: usize,
    pub horizon: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            episodes: 10_000,
            horizon: 200,
            seed: 0,
            parallel: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        if xs.len() < 2 {
            return Estimate { mean, std_error: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        Estimate {
            mean,
            std_error: (var / n).sqrt(),
        }
    }

    /// Whether `exact` lies within `k` standard errors plus `slack`.
    pub fn covers(&self, exact: f64, k: f64, slack: f64) -> bool {
        (self.mean - exact).abs() <= k * self.std_error + slack + 1e-12
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SimulationResult {
    /// Fraction of episodes entering a target within the horizon.
    pub reach: Estimate,
    /// Discounted cost accumulated over the horizon.
    pub cost: Estimate,
    /// Bound on the discounted cost beyond the horizon.
    pub tail_bound: f64,
    pub episodes: usize,
    pub horizon: usize,
}

/// `β^H · cmax / (1 − β)`.
pub fn tail_bound(beta: f64, cmax: f64, horizon: usize) -> f64 {
    beta.powi(horizon.min(i32::MAX as usize) as i32) * cmax / (1.0 - beta)
}

/// Smallest horizon whose tail bound is at most `tol`.
pub fn horizon_for_tolerance(beta: f64, cmax: f64, tol: f64) -> usize {
    if cmax <= 0.0 {
        return 1;
    }
    let h = ((tol * (1.0 - beta) / cmax).ln() / beta.ln()).ceil();
    if h.is_finite() && h > 0.0 {
        h as usize
    } else {
        1
    }
}

fn sample(rng: &mut ChaCha8Rng, items: impl Iterator<Item = (usize, f64)>) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in items {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

fn episode(mdp: &Mdp, pol: &StationaryPolicy, horizon: usize, seed: u64, index: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let beta = mdp.discount();
    let mut s = mdp.initial();
    let mut reached = mdp.is_target(s);
    let mut cost = 0.0;
    let mut weight = 1.0;
    for _ in 0..horizon {
        if reached && mdp.costs()[s].iter().all(|&c| c == 0.0) {
            break;
        }
        let a = sample(&mut rng, pol.row(s).iter().copied().enumerate());
        cost += weight * mdp.cost(s, a);
        weight *= beta;
        s = sample(&mut rng, mdp.transitions(s, a).iter().copied());
        reached |= mdp.is_target(s);
    }
    (if reached { 1.0 } else { 0.0 }, cost)
}

pub fn simulate(mdp: &Mdp, pol: &StationaryPolicy, opts: &SimulationOptions) -> Result<SimulationResult> {
    pol.check(mdp)?;
    if opts.episodes == 0 {
        return Err(Error::InvalidArgument("at least one episode is required".into()));
    }
    let run = |i: usize| episode(mdp, pol, opts.horizon, opts.seed, i as u64);
    let samples: Vec<(f64, f64)> = if opts.parallel {
        (0..opts.episodes).into_par_iter().map(run).collect()
    } else {
        (0..opts.episodes).map(run).collect()
    };
    let (reach, cost): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
    Ok(SimulationResult {
        reach: Estimate::from_samples(&reach),
        cost: Estimate::from_samples(&cost),
        tail_bound: tail_bound(mdp.discount(), mdp.max_cost(), opts.horizon),
        episodes: opts.episodes,
        horizon: opts.horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::fixtures::*;

    #[test]
    fn paid_exit_costs_one_every_episode() {
        let m = fig1(0.5);
        let pol = StationaryPolicy::deterministic(&m, &[1, 0]);
        let opts = SimulationOptions { episodes: 500, ..Default::default() };
        let r = simulate(&m, &pol, &opts).unwrap();
        assert_eq!(r.cost, Estimate { mean: 1.0, std_error: 0.0 });
        assert_eq!(r.reach.mean, 1.0);
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let m = two_path(0.5);
        let pol = StationaryPolicy::uniform(&m);
        let seq = SimulationOptions { episodes: 2000, parallel: false, seed: 7, ..Default::default() };
        let par = SimulationOptions { parallel: true, ..seq.clone() };
        assert_eq!(simulate(&m, &pol, &seq).unwrap(), simulate(&m, &pol, &par).unwrap());
    }

    #[test]
    fn horizon_meets_tolerance() {
        for beta in [0.5, 0.9, 0.99] {
            let h = horizon_for_tolerance(beta, 4.0, 1e-6);
            assert!(tail_bound(beta, 4.0, h) <= 1e-6);
            assert!(tail_bound(beta, 4.0, h - 1) > 1e-6);
        }
    }
}
