//! Maximum reachability probabilities and the cleaned-up MDP.

use nalgebra::DVector;
use reachsynth_lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};

use crate::chain::{backward_closure, induced_chain, restricted_solve};
use crate::error::{Error, Result};
use crate::graph::{partition_states, StatePartition};
use crate::mdp::Mdp;
use crate::policy::StationaryPolicy;
use crate::tol;

#[derive(Clone, Debug, PartialEq)]
pub struct ReachAnalysis {
    /// Maximum probability of reaching `B` from each state.
    pub x: Vec<f64>,
    /// Reach-preserving actions on `Sr`; every action elsewhere.
    pub amax: Vec<Vec<usize>>,
    pub partition: StatePartition,
}

impl ReachAnalysis {
    /// Maximum reach probability from the initial state.
    pub fn x_initial(&self, mdp: &Mdp) -> f64 {
        self.x[mdp.initial()]
    }
}

/// Computes the least fixed point of the maximum-reachability equations by
/// linear programming, with `B` pinned to 1 and `S0` to 0.
pub fn max_reach(mdp: &Mdp) -> Result<ReachAnalysis> {
    let partition = partition_states(mdp);
    let n = mdp.num_states();
    let rest = partition.rest();
    let mut col = vec![usize::MAX; n];
    let mut lp = LinearProgram::new(Sense::Minimize);
    for &s in &rest {
        col[s] = lp.add_var(format!("x[{}]", mdp.state_name(s)), 1.0);
    }
    for &s in &rest {
        for a in 0..mdp.num_actions(s) {
            let mut coeffs = vec![(col[s], 1.0)];
            let mut rhs = 0.0;
            for &(t, p) in mdp.transitions(s, a) {
                if partition.is_rest(t) {
                    coeffs.push((col[t], -p));
                } else if partition.is_target(t) {
                    rhs += p;
                }
            }
            lp.add_row(
                format!("bellman[{},{}]", mdp.state_name(s), mdp.actions(s)[a]),
                coeffs,
                Relation::Ge,
                rhs,
            );
        }
    }
    let mut x: Vec<f64> = (0..n)
        .map(|s| if partition.is_target(s) { 1.0 } else { 0.0 })
        .collect();
    if !rest.is_empty() {
        let sol = solve_lp(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Solver {
                what: "maximum reachability LP".into(),
                status: format!("{:?}", sol.status),
            });
        }
        for &s in &rest {
            x[s] = sol.x[col[s]].clamp(0.0, 1.0);
        }
    }
    let amax = (0..n)
        .map(|s| {
            let all: Vec<usize> = (0..mdp.num_actions(s)).collect();
            if !partition.is_rest(s) {
                return all;
            }
            all.into_iter()
                .filter(|&a| {
                    let next: f64 = mdp.transitions(s, a).iter().map(|&(t, p)| p * x[t]).sum();
                    x[s] - next <= tol::AMAX
                })
                .collect()
        })
        .collect();
    Ok(ReachAnalysis { x, amax, partition })
}

/// Removes the actions that lose reach probability at `Sr` states.
pub fn cleanup(mdp: &Mdp, ra: &ReachAnalysis) -> Result<Mdp> {
    mdp.restrict(|s, a| ra.amax[s].contains(&a))
}

/// Exact probability of eventually reaching `B` from every state under
/// `pol`.
///
/// Only states with a path to `B` in the induced chain enter the linear
/// system; the rest reach with probability 0.
pub fn reach_probs(mdp: &Mdp, pol: &StationaryPolicy) -> Result<Vec<f64>> {
    let chain = induced_chain(mdp, pol)?;
    let n = mdp.num_states();
    let target: Vec<bool> = (0..n).map(|s| mdp.is_target(s)).collect();
    let can = backward_closure(&chain.p, &target);
    let keep: Vec<bool> = (0..n).map(|s| can[s] && !target[s]).collect();
    let rhs = DVector::from_fn(n, |s, _| {
        (0..n).filter(|&t| target[t]).map(|t| chain.p[(s, t)]).sum()
    });
    let z = restricted_solve(&chain.p, &keep, &rhs, "computing reach probabilities")?;
    Ok((0..n)
        .map(|s| if target[s] { 1.0 } else { z[s].clamp(0.0, 1.0) })
        .collect())
}

/// Probability of reaching `B` from the initial state under `pol`.
pub fn reach_prob(mdp: &Mdp, pol: &StationaryPolicy) -> Result<f64> {
    Ok(reach_probs(mdp, pol)?[mdp.initial()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::fixtures::*;
    use crate::mdp::MdpBuilder;

    /// Iterates `x ← max_a P x` from the target indicator; converges to the
    /// least fixed point from below.
    fn value_iteration_reach(m: &Mdp) -> Vec<f64> {
        let n = m.num_states();
        let mut x: Vec<f64> = (0..n).map(|s| if m.is_target(s) { 1.0 } else { 0.0 }).collect();
        for _ in 0..10_000 {
            x = (0..n)
                .map(|s| {
                    if m.is_target(s) {
                        return 1.0;
                    }
                    (0..m.num_actions(s))
                        .map(|a| m.transitions(s, a).iter().map(|&(t, p)| p * x[t]).sum::<f64>())
                        .fold(0.0, f64::max)
                })
                .collect();
        }
        x
    }

    #[test]
    fn fig1_reach() {
        let m = fig1(0.5);
        let ra = max_reach(&m).unwrap();
        assert!((ra.x[0] - 1.0).abs() < 1e-9);
        assert_eq!(ra.amax[0], vec![0, 1]);
        assert_eq!(cleanup(&m, &ra).unwrap(), m);
    }

    #[test]
    fn trap_halves_reach() {
        let m = fig1_trap(0.5);
        let ra = max_reach(&m).unwrap();
        let vi = value_iteration_reach(&m);
        assert!((ra.x[0] - 0.5).abs() < 1e-9);
        assert!((ra.x[0] - vi[0]).abs() < 1e-9);
        assert_eq!(ra.x[1], 1.0);
        assert_eq!(ra.x[2], 0.0);
    }

    #[test]
    fn losing_action_removed() {
        let mut b = MdpBuilder::new(0.5);
        let s = b.add_state("s");
        let g = b.add_state("g");
        let z = b.add_state("z");
        b.add_action(s, "a", &[(z, 1.0)], 0.0);
        b.add_action(s, "b", &[(g, 1.0)], 0.0);
        b.add_action(g, "x", &[(g, 1.0)], 0.0);
        b.add_action(z, "x", &[(z, 1.0)], 0.0);
        b.initial(s).target(g);
        let m = b.build().unwrap();
        let ra = max_reach(&m).unwrap();
        let c = cleanup(&m, &ra).unwrap();
        assert_eq!(c.actions(0), ["b"]);
        assert!(c.validate().is_empty());
    }

    #[test]
    fn two_path_unchanged() {
        let m = two_path(0.5);
        let ra = max_reach(&m).unwrap();
        assert_eq!(cleanup(&m, &ra).unwrap(), m);
        for choice in [[0, 0, 0], [1, 0, 0]] {
            let p = StationaryPolicy::deterministic(&m, &choice);
            assert!((reach_prob(&m, &p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fig1_reach_prob() {
        let m = fig1(0.5);
        let half = StationaryPolicy::from_rows(vec![vec![0.5, 0.5], vec![1.0]]);
        assert!((reach_prob(&m, &half).unwrap() - 1.0).abs() < 1e-12);
        let never = StationaryPolicy::deterministic(&m, &[0, 0]);
        assert_eq!(reach_prob(&m, &never).unwrap(), 0.0);
    }

    #[test]
    fn target_has_full_reach() {
        let m = fig1(0.5);
        let ra = max_reach(&m).unwrap();
        assert_eq!(ra.x[1], 1.0);
    }
}
