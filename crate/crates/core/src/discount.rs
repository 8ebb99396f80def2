//! Unconstrained discounted-cost optimization and exact policy evaluation.

use reachsynth_lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};

use crate::chain::induced_chain;
use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::policy::StationaryPolicy;
use crate::tol;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DiscountBackend {
    /// Value iteration to a certified sup-norm accuracy, then policy
    /// iteration to remove the residual.
    #[default]
    ValueIteration,
    LinearProgram,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscountAnalysis {
    /// Minimum discounted cost from each state.
    pub y: Vec<f64>,
    /// Actions attaining the minimum in each state.
    pub aopt: Vec<Vec<usize>>,
    /// Lowest-index member of `aopt` in every state.
    pub pitilde: StationaryPolicy,
    /// Value-iteration sweeps (0 for the LP backend).
    pub iterations: usize,
}

pub fn optimal_values(mdp: &Mdp) -> Result<DiscountAnalysis> {
    optimal_values_with(mdp, DiscountBackend::ValueIteration)
}

pub fn optimal_values_with(mdp: &Mdp, backend: DiscountBackend) -> Result<DiscountAnalysis> {
    let (y, iterations) = match backend {
        DiscountBackend::ValueIteration => value_iteration(mdp)?,
        DiscountBackend::LinearProgram => (lp_values(mdp)?, 0),
    };
    let n = mdp.num_states();
    let aopt: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            let q = q_values(mdp, &y, s);
            let best = q.iter().copied().fold(f64::INFINITY, f64::min);
            (0..q.len()).filter(|&a| q[a] - best <= tol::AOPT).collect()
        })
        .collect();
    let choice: Vec<usize> = aopt.iter().map(|a| a[0]).collect();
    let pitilde = StationaryPolicy::deterministic(mdp, &choice);
    Ok(DiscountAnalysis {
        y,
        aopt,
        pitilde,
        iterations,
    })
}

fn q_values(mdp: &Mdp, y: &[f64], s: usize) -> Vec<f64> {
    let beta = mdp.discount();
    (0..mdp.num_actions(s))
        .map(|a| {
            mdp.cost(s, a)
                + beta
                    * mdp
                        .transitions(s, a)
                        .iter()
                        .map(|&(t, p)| p * y[t])
                        .sum::<f64>()
        })
        .collect()
}

fn argmin_lowest(q: &[f64]) -> usize {
    let best = q.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = 1e-12 * (1.0 + best.abs());
    q.iter().position(|&v| v <= best + slack).unwrap_or(0)
}

const MAX_SWEEPS: usize = 1_000_000;

fn value_iteration(mdp: &Mdp) -> Result<(Vec<f64>, usize)> {
    let n = mdp.num_states();
    let beta = mdp.discount();
    let stop = (1.0 - beta) * tol::VALUE_ITERATION / (2.0 * beta);
    let mut y = vec![0.0; n];
    let mut sweeps = 0;
    loop {
        let next: Vec<f64> = (0..n)
            .map(|s| q_values(mdp, &y, s).into_iter().fold(f64::INFINITY, f64::min))
            .collect();
        let diff = next
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        y = next;
        sweeps += 1;
        if diff <= stop || sweeps >= MAX_SWEEPS {
            break;
        }
    }

    // Policy iteration from the greedy policy; each evaluation is an exact
    // linear solve, so the result carries no iteration residual.
    let mut choice: Vec<usize> = (0..n).map(|s| argmin_lowest(&q_values(mdp, &y, s))).collect();
    for _ in 0..100 {
        let pol = StationaryPolicy::deterministic(mdp, &choice);
        let v = cost_to_go(mdp, &pol)?;
        let mut changed = false;
        for s in 0..n {
            let q = q_values(mdp, &v, s);
            let best = q.iter().copied().fold(f64::INFINITY, f64::min);
            if q[choice[s]] > best + 1e-12 * (1.0 + v[s].abs()) {
                choice[s] = argmin_lowest(&q);
                changed = true;
            }
        }
        y = v;
        if !changed {
            break;
        }
    }
    Ok((y, sweeps))
}

fn lp_values(mdp: &Mdp) -> Result<Vec<f64>> {
    let n = mdp.num_states();
    let beta = mdp.discount();
    let mut lp = LinearProgram::new(Sense::Maximize);
    for s in 0..n {
        lp.add_var(format!("y[{}]", mdp.state_name(s)), 1.0);
    }
    for s in 0..n {
        for a in 0..mdp.num_actions(s) {
            let mut coeffs = vec![(s, 1.0)];
            for &(t, p) in mdp.transitions(s, a) {
                coeffs.push((t, -beta * p));
            }
            lp.add_row(
                format!("q[{},{}]", mdp.state_name(s), mdp.actions(s)[a]),
                coeffs,
                Relation::Le,
                mdp.cost(s, a),
            );
        }
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver {
            what: "discounted-cost LP".into(),
            status: format!("{:?}", sol.status),
        });
    }
    Ok(sol.x)
}

/// Discounted cost-to-go of `pol` from every state.
pub fn cost_to_go(mdp: &Mdp, pol: &StationaryPolicy) -> Result<Vec<f64>> {
    let chain = induced_chain(mdp, pol)?;
    Ok(chain.discounted_values(mdp.discount())?.as_slice().to_vec())
}

/// `J(π) = αᵀ(I − βP^π)⁻¹c^π`.
pub fn evaluate_cost(mdp: &Mdp, pol: &StationaryPolicy) -> Result<f64> {
    Ok(cost_to_go(mdp, pol)?[mdp.initial()])
}

/// Keeps only the cost-optimal actions in every state.
pub fn modified_mdp(mdp_prime: &Mdp, da: &DiscountAnalysis) -> Result<Mdp> {
    mdp_prime.restrict(|s, a| da.aopt[s].contains(&a))
}
