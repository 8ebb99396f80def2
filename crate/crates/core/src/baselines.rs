//! Comparison policies for the grid experiments.

use reachsynth_lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};

use crate::approx::lp_policy;
use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::policy::StationaryPolicy;
use crate::reach::{max_reach, ReachAnalysis};
use crate::tol;

/// Same two-LP pipeline as the approximation, but on the raw costs instead
/// of the surrogate ones.
pub fn undiscounted_policy(mdp: &Mdp) -> Result<StationaryPolicy> {
    let ra = max_reach(mdp)?;
    let costs: Vec<Vec<f64>> = (0..mdp.num_states())
        .map(|s| {
            (0..mdp.num_actions(s))
                .map(|a| if ra.partition.is_rest(s) { mdp.cost(s, a) } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(lp_policy(mdp, &ra, &costs)?.0)
}

/// Maximizes the discounted probability of entering `B`, then minimizes
/// discounted cost among maximizers, both over discounted occupations.
pub fn discounted_reach_policy(mdp: &Mdp) -> Result<StationaryPolicy> {
    let ra = max_reach(mdp)?;
    let n = mdp.num_states();
    let beta = mdp.discount();
    let mut lp = LinearProgram::new(Sense::Maximize);
    let mut col = Vec::with_capacity(n);
    for s in 0..n {
        col.push(
            (0..mdp.num_actions(s))
                .map(|a| {
                    let r = reward(mdp, &ra, s, a);
                    lp.add_var(format!("l[{},{}]", mdp.state_name(s), mdp.actions(s)[a]), r)
                })
                .collect::<Vec<_>>(),
        );
    }
    let mut inflow: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for s in 0..n {
        for a in 0..mdp.num_actions(s) {
            for &(t, p) in mdp.transitions(s, a) {
                inflow[t].push((col[s][a], p));
            }
        }
    }
    let s1 = mdp.initial();
    for s in 0..n {
        let mut coeffs: Vec<(usize, f64)> = col[s].iter().map(|&j| (j, 1.0)).collect();
        coeffs.extend(inflow[s].iter().map(|&(j, p)| (j, -beta * p)));
        let alpha = if s == s1 { 1.0 } else { 0.0 };
        lp.add_row(format!("disc[{}]", mdp.state_name(s)), coeffs, Relation::Eq, alpha);
    }
    let first = solve_lp(&lp)?;
    if first.status != LpStatus::Optimal {
        return Err(Error::Solver {
            what: "discounted reach LP".into(),
            status: format!("{:?}", first.status),
        });
    }
    let r_star = first.objective;

    let mut second = LinearProgram::new(Sense::Minimize);
    let mut reach_row = Vec::new();
    for s in 0..n {
        for a in 0..mdp.num_actions(s) {
            let j = second.add_var(lp.var_name(col[s][a]).to_string(), mdp.cost(s, a));
            let r = reward(mdp, &ra, s, a);
            if r != 0.0 {
                reach_row.push((j, r));
            }
        }
    }
    for row in lp.rows() {
        second.add_row(row.name.clone(), row.coeffs.clone(), row.relation, row.rhs);
    }
    let row = second.add_row("reach", reach_row, Relation::Ge, r_star);
    let mut sol = solve_lp(&second)?;
    if sol.status != LpStatus::Optimal {
        second.row_mut(row).rhs = r_star - 1e-9 * r_star.abs().max(1.0);
        sol = solve_lp(&second)?;
    }
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver {
            what: "discounted cost LP".into(),
            status: format!("{:?}", sol.status),
        });
    }
    let choice: Vec<usize> = (0..n)
        .map(|s| {
            (0..mdp.num_actions(s))
                .find(|&a| sol.x[col[s][a]] > tol::SUPPORT)
                .unwrap_or(if ra.partition.is_rest(s) { ra.amax[s][0] } else { 0 })
        })
        .collect();
    Ok(StationaryPolicy::deterministic(mdp, &choice))
}

fn reward(mdp: &Mdp, ra: &ReachAnalysis, s: usize, a: usize) -> f64 {
    if !ra.partition.is_rest(s) {
        return 0.0;
    }
    mdp.transitions(s, a)
        .iter()
        .filter(|&&(t, _)| mdp.is_target(t))
        .map(|&(_, p)| p)
        .sum()
}
