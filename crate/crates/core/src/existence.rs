//! Deciding whether an exactly optimal policy exists, with a witness.

use crate::discount::{modified_mdp, optimal_values};
use crate::error::Result;
use crate::graph::distance_to_targets;
use crate::mdp::Mdp;
use crate::policy::StationaryPolicy;
use crate::reach::{cleanup, max_reach};
use crate::tol;

#[derive(Clone, Debug)]
pub struct ExistenceCertificate {
    pub exists: bool,
    /// Maximum reach probabilities on `M`.
    pub x: Vec<f64>,
    /// Maximum reach probabilities once only cost-optimal actions remain.
    pub xbar: Vec<f64>,
    /// Deterministic optimal policy on the input MDP, when one exists.
    pub witness: Option<StationaryPolicy>,
    /// Optimal value, attained or not.
    pub infimum: f64,
}

/// Decides existence by comparing maximum reach before and after pruning to
/// cost-optimal actions.
pub fn check_existence(mdp: &Mdp) -> Result<ExistenceCertificate> {
    let s1 = mdp.initial();
    let ra = max_reach(mdp)?;
    let mdp_prime = cleanup(mdp, &ra)?;
    let da = optimal_values(&mdp_prime)?;
    let mbar = modified_mdp(&mdp_prime, &da)?;
    let rbar = max_reach(&mbar)?;
    let exists = (rbar.x[s1] - ra.x[s1]).abs() <= tol::REPORT;
    let witness = if exists {
        Some(witness(&mbar, &rbar.x).lift(&mbar, mdp))
    } else {
        None
    };
    Ok(ExistenceCertificate {
        exists,
        x: ra.x,
        xbar: rbar.x,
        witness,
        infimum: da.y[s1],
    })
}

/// Among actions preserving `xbar`, steps toward `B` along a shortest
/// positive-probability path.
fn witness(mbar: &Mdp, xbar: &[f64]) -> StationaryPolicy {
    let keeps = |s: usize, a: usize| {
        if mbar.is_target(s) || xbar[s] <= 0.0 {
            return true;
        }
        let next: f64 = mbar.transitions(s, a).iter().map(|&(t, p)| p * xbar[t]).sum();
        (xbar[s] - next).abs() <= tol::AMAX
    };
    let dist = distance_to_targets(mbar, keeps);
    let choice: Vec<usize> = (0..mbar.num_states())
        .map(|s| {
            let Some(d) = dist[s].filter(|_| !mbar.is_target(s) && xbar[s] > 0.0) else {
                return 0;
            };
            (0..mbar.num_actions(s))
                .find(|&a| {
                    keeps(s, a)
                        && mbar
                            .transitions(s, a)
                            .iter()
                            .any(|&(t, p)| p > 0.0 && dist[t].is_some_and(|dt| dt < d))
                })
                .unwrap_or(0)
        })
        .collect();
    StationaryPolicy::deterministic(mbar, &choice)
}
