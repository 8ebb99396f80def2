//! Exhaustive search over deterministic policies, for cross-checking the
//! solvers on small instances.

use crate::approx::surrogate_value;
use crate::discount::evaluate_cost;
use crate::error::{Error, Result};
use crate::graph::partition_states;
use crate::mdp::Mdp;
use crate::policy::StationaryPolicy;
use crate::reach::{max_reach, reach_prob};

pub const ORACLE_LIMIT: usize = 1_000_000;
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct OracleEntry {
    pub choice: Vec<usize>,
    pub reach: f64,
    pub cost: f64,
    pub feasible: bool,
    /// Expected number of steps spent outside `B ∪ S0`, undiscounted.
    pub rest_steps: f64,
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub best: Vec<usize>,
    pub policy: StationaryPolicy,
    pub cost: f64,
    pub x_initial: f64,
    pub table: Vec<OracleEntry>,
}

impl OracleResult {
    pub fn feasible(&self) -> impl Iterator<Item = &OracleEntry> {
        self.table.iter().filter(|e| e.feasible)
    }

    /// Largest expected step count in `Sr` over feasible policies.
    pub fn max_rest_steps(&self) -> f64 {
        self.feasible().map(|e| e.rest_steps).fold(0.0, f64::max)
    }
}

/// Number of deterministic policies, as a float to survive overflow.
pub fn policy_count(mdp: &Mdp) -> f64 {
    (0..mdp.num_states()).map(|s| mdp.num_actions(s) as f64).product()
}

/// Enumerates every deterministic policy, keeps those reaching with the
/// maximum probability and returns the cheapest (first in enumeration order
/// on ties).
pub fn brute_force_oracle(mdp: &Mdp) -> Result<OracleResult> {
    let count = policy_count(mdp);
    if count > ORACLE_LIMIT as f64 {
        return Err(Error::TooManyPolicies {
            count,
            limit: ORACLE_LIMIT as f64,
        });
    }
    let ra = max_reach(mdp)?;
    let x1 = ra.x[mdp.initial()];
    let part = partition_states(mdp);
    let unit: Vec<Vec<f64>> = (0..mdp.num_states())
        .map(|s| vec![if part.is_rest(s) { 1.0 } else { 0.0 }; mdp.num_actions(s)])
        .collect();
    let n = mdp.num_states();
    let mut choice = vec![0usize; n];
    let mut table = Vec::with_capacity(count as usize);
    loop {
        let pol = StationaryPolicy::deterministic(mdp, &choice);
        let reach = reach_prob(mdp, &pol)?;
        let cost = evaluate_cost(mdp, &pol)?;
        table.push(OracleEntry {
            choice: choice.clone(),
            reach,
            cost,
            feasible: (reach - x1).abs() <= FEASIBILITY_TOL,
            rest_steps: surrogate_value(mdp, &pol, &unit)?,
        });
        let mut s = 0;
        while s < n {
            choice[s] += 1;
            if choice[s] < mdp.num_actions(s) {
                break;
            }
            choice[s] = 0;
            s += 1;
        }
        if s == n {
            break;
        }
    }
    let best = table
        .iter()
        .filter(|e| e.feasible)
        .fold(None::<&OracleEntry>, |b, e| match b {
            Some(b) if b.cost <= e.cost => Some(b),
            _ => Some(e),
        })
        .expect("some deterministic policy attains the maximum reach probability");
    Ok(OracleResult {
        best: best.choice.clone(),
        policy: StationaryPolicy::deterministic(mdp, &best.choice),
        cost: best.cost,
        x_initial: x1,
        table,
    })
}
