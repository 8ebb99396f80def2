//! Optimal stationary deterministic policies by mixed-integer programming
//! over discounted and undiscounted occupation measures.

use std::time::Duration;

use reachsynth_lp::{
    solve_milp, LinearProgram, MilpOptions, MilpStatus, MixedIntegerProgram, Relation, Sense,
};

use crate::discount::evaluate_cost;
use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::policy::StationaryPolicy;
use crate::reach::{max_reach, reach_prob, ReachAnalysis};

/// The linking constant and whether it is known to be large enough.
#[derive(Clone, Debug, PartialEq)]
pub struct BigM {
    pub value: f64,
    /// True when the constant provably bounds the expected number of steps
    /// spent outside `B ∪ S0` (deterministic transitions).
    pub certified: bool,
    pub note: String,
}

pub const DEFAULT_K: u32 = 100;

/// `|S|` for deterministic transitions, `k|S|` otherwise.
pub fn big_m(mdp: &Mdp, k: u32) -> BigM {
    let n = mdp.num_states() as f64;
    if mdp.has_deterministic_transitions() {
        BigM {
            value: n,
            certified: true,
            note: "deterministic transitions: a reach-optimal deterministic policy visits each state at most once".into(),
        }
    } else {
        BigM {
            value: k as f64 * n,
            certified: false,
            note: format!(
                "heuristic k|S| with k = {k}; exact only if it bounds the expected steps of every reach-optimal deterministic policy"
            ),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MilpModel {
    pub mip: MixedIntegerProgram,
    /// Column of the discounted occupation of `(s, a)`.
    pub lambda1: Vec<Vec<usize>>,
    /// Column of the undiscounted occupation of `(s, a)` (fixed to 0 off `Sr`).
    pub lambda2: Vec<Vec<usize>>,
    pub delta: Vec<Vec<usize>>,
    pub big_m: f64,
    /// Linking constant actually used for the discounted family.
    pub big_m_discounted: f64,
    /// One-step probability of entering `B`, on `Sr` only.
    pub reward: Vec<Vec<f64>>,
    pub target_value: f64,
}

/// Builds the occupation-measure program with binary action indicators.
///
/// The discounted occupations sum to `1/(1-β)`, which can exceed `big_m`
/// at large discounts, so their linking rows use
/// `max(big_m, 1/(1-β))`.
pub fn build_milp(mdp: &Mdp, ra: &ReachAnalysis, big_m: f64) -> MilpModel {
    let n = mdp.num_states();
    let beta = mdp.discount();
    let part = &ra.partition;
    let m1 = big_m.max(1.0 / (1.0 - beta));
    let mut mip = MixedIntegerProgram::new(LinearProgram::new(Sense::Minimize));
    let mut lambda1 = Vec::with_capacity(n);
    let mut lambda2 = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);
    let mut reward = Vec::with_capacity(n);
    for s in 0..n {
        let (mut l1, mut l2, mut d, mut r) = (vec![], vec![], vec![], vec![]);
        for a in 0..mdp.num_actions(s) {
            let tag = format!("{},{}", mdp.state_name(s), mdp.actions(s)[a]);
            l1.push(mip.lp.add_var(format!("l1[{tag}]"), mdp.cost(s, a)));
            let hi = if part.is_rest(s) { big_m } else { 0.0 };
            l2.push(mip.lp.add_var_bounded(format!("l2[{tag}]"), 0.0, 0.0, hi));
            d.push(mip.add_binary(format!("d[{tag}]"), 0.0));
            r.push(if part.is_rest(s) {
                mdp.transitions(s, a)
                    .iter()
                    .filter(|&&(t, _)| mdp.is_target(t))
                    .map(|&(_, p)| p)
                    .sum()
            } else {
                0.0
            });
        }
        lambda1.push(l1);
        lambda2.push(l2);
        delta.push(d);
        reward.push(r);
    }

    let s1 = mdp.initial();
    let alpha = |s: usize| if s == s1 { 1.0 } else { 0.0 };
    let mut inflow: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n];
    for s in 0..n {
        for a in 0..mdp.num_actions(s) {
            for &(t, p) in mdp.transitions(s, a) {
                inflow[t].push((s, a, p));
            }
        }
    }
    for s in 0..n {
        let mut coeffs: Vec<(usize, f64)> = lambda1[s].iter().map(|&j| (j, 1.0)).collect();
        coeffs.extend(inflow[s].iter().map(|&(u, a, p)| (lambda1[u][a], -beta * p)));
        mip.lp.add_row(format!("disc[{}]", mdp.state_name(s)), coeffs, Relation::Eq, alpha(s));
    }
    for s in part.rest() {
        let mut coeffs: Vec<(usize, f64)> = lambda2[s].iter().map(|&j| (j, 1.0)).collect();
        coeffs.extend(inflow[s].iter().map(|&(u, a, p)| (lambda2[u][a], -p)));
        mip.lp.add_row(format!("undisc[{}]", mdp.state_name(s)), coeffs, Relation::Eq, alpha(s));
    }
    let reach: Vec<(usize, f64)> = part
        .rest()
        .into_iter()
        .flat_map(|s| {
            let l2 = &lambda2[s];
            let r = &reward[s];
            (0..l2.len()).filter(|&a| r[a] != 0.0).map(move |a| (l2[a], r[a]))
        })
        .collect();
    let target_value = ra.x[s1];
    mip.lp.add_row("reach", reach, Relation::Eq, target_value);
    for s in 0..n {
        for a in 0..mdp.num_actions(s) {
            let tag = format!("{},{}", mdp.state_name(s), mdp.actions(s)[a]);
            mip.lp.add_row(
                format!("link1[{tag}]"),
                vec![(lambda1[s][a], 1.0), (delta[s][a], -m1)],
                Relation::Le,
                0.0,
            );
            mip.lp.add_row(
                format!("link2[{tag}]"),
                vec![(lambda2[s][a], 1.0), (delta[s][a], -big_m)],
                Relation::Le,
                0.0,
            );
        }
        mip.lp.add_row(
            format!("one[{}]", mdp.state_name(s)),
            delta[s].iter().map(|&j| (j, 1.0)).collect(),
            Relation::Le,
            1.0,
        );
    }
    MilpModel {
        mip,
        lambda1,
        lambda2,
        delta,
        big_m,
        big_m_discounted: m1,
        reward,
        target_value,
    }
}

impl MilpModel {
    /// Deterministic policy from indicator values: the selected action where
    /// one is selected, otherwise the lowest-index action.
    pub fn extract(&self, x: &[f64]) -> Vec<usize> {
        self.delta
            .iter()
            .map(|d| {
                let picked: Vec<usize> = (0..d.len()).filter(|&a| x[d[a]] > 0.5).collect();
                if picked.len() == 1 {
                    picked[0]
                } else {
                    0
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExactOptions {
    pub k: u32,
    pub time_limit: Option<Duration>,
    pub gap_tol: f64,
    pub node_limit: Option<usize>,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            time_limit: None,
            gap_tol: 1e-6,
            node_limit: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExactSynthesis {
    pub policy: StationaryPolicy,
    pub cost: f64,
    pub reach: f64,
    pub x_initial: f64,
    pub milp_objective: f64,
    pub status: MilpStatus,
    /// Best proven lower bound on the objective.
    pub bound: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub big_m: BigM,
}

impl ExactSynthesis {
    pub fn gap(&self) -> f64 {
        (self.milp_objective - self.bound).max(0.0)
    }
}

pub fn solve_exact(mdp: &Mdp, opts: &ExactOptions) -> Result<ExactSynthesis> {
    let ra = max_reach(mdp)?;
    let bm = big_m(mdp, opts.k);
    let model = build_milp(mdp, &ra, bm.value);
    let sol = solve_milp(
        &model.mip,
        &MilpOptions {
            time_limit: opts.time_limit,
            gap_tol: opts.gap_tol,
            node_limit: opts.node_limit,
            ..Default::default()
        },
    )?;
    let Some(inc) = sol.incumbent.as_ref() else {
        return Err(Error::Solver {
            what: "occupation-measure MILP".into(),
            status: format!("{:?} without incumbent", sol.status),
        });
    };
    let policy = StationaryPolicy::deterministic(mdp, &model.extract(&inc.x));
    Ok(ExactSynthesis {
        cost: evaluate_cost(mdp, &policy)?,
        reach: reach_prob(mdp, &policy)?,
        policy,
        x_initial: ra.x[mdp.initial()],
        milp_objective: inc.objective,
        status: sol.status,
        bound: sol.bound,
        nodes: sol.stats.nodes,
        lp_iterations: sol.stats.lp_iterations,
        big_m: bm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::fixtures::*;
    use crate::mdp::MdpBuilder;

    #[test]
    fn big_m_rules() {
        assert_eq!(big_m(&two_path(0.5), 100).value, 3.0);
        assert!(big_m(&two_path(0.5), 100).certified);
        assert_eq!(big_m(&fig1_trap(0.5), 100).value, 300.0);
        let mut b = MdpBuilder::new(0.5);
        let g = b.add_state("g");
        b.add_action(g, "x", &[(g, 1.0)], 0.0);
        b.initial(g).target(g);
        assert_eq!(big_m(&b.build().unwrap(), 7).value, 1.0);
    }

    #[test]
    fn fig1_model_shape() {
        let m = fig1(0.5);
        let ra = max_reach(&m).unwrap();
        let model = build_milp(&m, &ra, 2.0);
        assert_eq!(model.mip.binaries().len(), 3);
        assert_eq!(model.reward[0], vec![0.0, 1.0]);
        assert_eq!(model.reward[1], vec![0.0]);
        assert_eq!(model.mip.lp.bounds(model.lambda2[1][0]), (0.0, 0.0));
    }

    #[test]
    fn two_path_reach_row() {
        let m = two_path(0.5);
        let ra = max_reach(&m).unwrap();
        let model = build_milp(&m, &ra, 3.0);
        let row = model.mip.lp.rows().iter().find(|r| r.name == "reach").unwrap();
        assert_eq!(row.rhs, 1.0);
        let mut cols: Vec<(usize, f64)> = row.coeffs.clone();
        cols.sort_by_key(|c| c.0);
        assert_eq!(cols, vec![(model.lambda2[0][0], 1.0), (model.lambda2[1][0], 1.0)]);
    }

    #[test]
    fn trap_rewards_vanish() {
        let m = fig1_trap(0.5);
        let ra = max_reach(&m).unwrap();
        let model = build_milp(&m, &ra, 300.0);
        assert_eq!(model.reward[2], vec![0.0]);
        assert_eq!(model.reward[0], vec![0.0, 0.5]);
        assert_eq!(model.mip.lp.bounds(model.lambda2[2][0]), (0.0, 0.0));
    }

    #[test]
    fn solves_small_instances() {
        let out = solve_exact(&fig1(0.5), &ExactOptions::default()).unwrap();
        assert_eq!(out.policy.action(0), Some(1));
        assert!((out.cost - 1.0).abs() < 1e-9);
        assert_eq!(out.status, MilpStatus::Optimal);

        let out = solve_exact(&two_path(0.5), &ExactOptions::default()).unwrap();
        assert_eq!(out.policy.action(0), Some(1));
        assert_eq!(out.policy.action(1), Some(0));
        assert!((out.cost - 1.5).abs() < 1e-9);
        assert!((out.milp_objective - 1.5).abs() < 1e-6);
    }

    #[test]
    fn large_discount_stays_feasible() {
        let out = solve_exact(&fig1(0.9), &ExactOptions::default()).unwrap();
        assert_eq!(out.policy.action(0), Some(1));
        assert!((out.reach - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_m_is_enough_for_fig1() {
        let m = fig1(0.5);
        let ra = max_reach(&m).unwrap();
        for bm in [1.0, 3.0, 50.0] {
            let model = build_milp(&m, &ra, bm);
            let sol = solve_milp(&model.mip, &MilpOptions::default()).unwrap();
            let x = &sol.incumbent.unwrap().x;
            assert_eq!(model.extract(x)[0], 1, "M = {bm}");
        }
    }
}
