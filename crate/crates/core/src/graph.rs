//! Graph searches over the positive-probability structure of an MDP.

use std::collections::VecDeque;

use crate::chain::{forward_closure, induced_chain};
use crate::error::Result;
use crate::mdp::Mdp;
use crate::policy::StationaryPolicy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateClass {
    /// In the absorbing target set `B`.
    Target,
    /// No path to `B` under any choice of actions.
    Zero,
    /// Everything else.
    Rest,
}

/// The `(B, S0, Sr)` split of the state space plus hop distances from the
/// initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct StatePartition {
    class: Vec<StateClass>,
    /// Fewest vertices on a path from the initial state; `None` when
    /// unreachable. The initial state itself has distance 1.
    tmin: Vec<Option<u32>>,
}

impl StatePartition {
    pub fn class(&self, s: usize) -> StateClass {
        self.class[s]
    }

    pub fn is_rest(&self, s: usize) -> bool {
        self.class[s] == StateClass::Rest
    }

    pub fn is_target(&self, s: usize) -> bool {
        self.class[s] == StateClass::Target
    }

    pub fn is_zero(&self, s: usize) -> bool {
        self.class[s] == StateClass::Zero
    }

    fn members(&self, c: StateClass) -> Vec<usize> {
        (0..self.class.len()).filter(|&s| self.class[s] == c).collect()
    }

    pub fn targets(&self) -> Vec<usize> {
        self.members(StateClass::Target)
    }

    pub fn zero(&self) -> Vec<usize> {
        self.members(StateClass::Zero)
    }

    pub fn rest(&self) -> Vec<usize> {
        self.members(StateClass::Rest)
    }

    pub fn tmin(&self, s: usize) -> Option<u32> {
        self.tmin[s]
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }
}

/// Splits the states into `B`, `S0` and `Sr` and computes `T_min`.
pub fn partition_states(mdp: &Mdp) -> StatePartition {
    let n = mdp.num_states();
    let can_reach = backward_reach(mdp, |_, _| true);
    let class = (0..n)
        .map(|s| {
            if mdp.is_target(s) {
                StateClass::Target
            } else if can_reach[s] {
                StateClass::Rest
            } else {
                StateClass::Zero
            }
        })
        .collect();
    StatePartition {
        class,
        tmin: hop_distances(mdp),
    }
}

/// States with a positive-probability path to `B` using only the allowed
/// actions.
pub(crate) fn backward_reach(mdp: &Mdp, allowed: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    distance_to_targets(mdp, allowed)
        .into_iter()
        .map(|d| d.is_some())
        .collect()
}

/// Breadth-first hop counts to `B` over the allowed actions (0 on `B`).
pub(crate) fn distance_to_targets(
    mdp: &Mdp,
    allowed: impl Fn(usize, usize) -> bool,
) -> Vec<Option<u32>> {
    let n = mdp.num_states();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        for a in 0..mdp.num_actions(s) {
            if !allowed(s, a) {
                continue;
            }
            for &(t, p) in mdp.transitions(s, a) {
                if p > 0.0 {
                    pred[t].push(s);
                }
            }
        }
    }
    let mut dist = vec![None; n];
    let mut queue = VecDeque::new();
    for &t in mdp.targets() {
        dist[t] = Some(0);
        queue.push_back(t);
    }
    while let Some(t) = queue.pop_front() {
        let d = dist[t].unwrap_or(0);
        for &s in &pred[t] {
            if dist[s].is_none() {
                dist[s] = Some(d + 1);
                queue.push_back(s);
            }
        }
    }
    dist
}

fn hop_distances(mdp: &Mdp) -> Vec<Option<u32>> {
    let n = mdp.num_states();
    let mut dist = vec![None; n];
    if n == 0 {
        return dist;
    }
    let s1 = mdp.initial();
    dist[s1] = Some(1);
    let mut queue = VecDeque::from([s1]);
    while let Some(s) = queue.pop_front() {
        let d = dist[s].unwrap_or(1);
        for a in 0..mdp.num_actions(s) {
            for &(t, p) in mdp.transitions(s, a) {
                if p > 0.0 && dist[t].is_none() {
                    dist[t] = Some(d + 1);
                    queue.push_back(t);
                }
            }
        }
    }
    dist
}

/// States visited with positive probability from the initial state under
/// `pol`, in increasing index order.
pub fn reachable_states(mdp: &Mdp, pol: &StationaryPolicy) -> Result<Vec<usize>> {
    let chain = induced_chain(mdp, pol)?;
    let seen = forward_closure(&chain.p, &[mdp.initial()]);
    Ok((0..seen.len()).filter(|&s| seen[s]).collect())
}
