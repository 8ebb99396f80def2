//! Finite MDPs with per-state action sets, an absorbing target set and a
//! discount factor.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::tol;

/// A validated finite MDP.
///
/// States and actions are dense indices. Action `a` of state `s` is the
/// `a`-th entry of [`Mdp::actions`]. Transition rows are sparse, sorted by
/// successor and free of duplicates.
#[derive(Clone, Debug, PartialEq)]
pub struct Mdp {
    states: Vec<String>,
    index: HashMap<String, usize>,
    actions: Vec<Vec<String>>,
    trans: Vec<Vec<Vec<(usize, f64)>>>,
    cost: Vec<Vec<f64>>,
    discount: f64,
    initial: usize,
    targets: Vec<usize>,
    target: Vec<bool>,
    /// Index of each action in the MDP this one was restricted from.
    origin: Vec<Vec<usize>>,
}

/// One broken invariant, naming the state/action involved.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NoStates,
    DuplicateState(String),
    NoActions { state: String },
    RowSum { state: String, action: String, sum: f64 },
    Probability { state: String, action: String, succ: usize, p: f64 },
    DanglingSuccessor { state: String, action: String, succ: usize },
    TargetNotAbsorbing { state: String, action: String },
    Cost { state: String, action: String, cost: f64 },
    Discount(f64),
    Initial(usize),
    Target(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoStates => write!(f, "state list is empty"),
            Violation::DuplicateState(s) => write!(f, "state `{s}` declared twice"),
            Violation::NoActions { state } => write!(f, "state `{state}` has no actions"),
            Violation::RowSum { state, action, sum } => {
                write!(f, "({state}, {action}): row sum {sum} ≠ 1")
            }
            Violation::Probability { state, action, succ, p } => {
                write!(f, "({state}, {action}): probability {p} to state #{succ} outside [0, 1]")
            }
            Violation::DanglingSuccessor { state, action, succ } => {
                write!(f, "({state}, {action}): successor #{succ} does not exist")
            }
            Violation::TargetNotAbsorbing { state, action } => {
                write!(f, "({state}, {action}): target not absorbing")
            }
            Violation::Cost { state, action, cost } => {
                write!(f, "({state}, {action}): cost {cost} is negative or not finite")
            }
            Violation::Discount(b) => write!(f, "discount {b} not in (0, 1)"),
            Violation::Initial(s) => write!(f, "initial state #{s} does not exist"),
            Violation::Target(s) => write!(f, "target state #{s} does not exist"),
        }
    }
}

/// Incremental construction of an [`Mdp`].
#[derive(Clone, Debug, Default)]
pub struct MdpBuilder {
    states: Vec<String>,
    actions: Vec<Vec<String>>,
    trans: Vec<Vec<Vec<(usize, f64)>>>,
    cost: Vec<Vec<f64>>,
    discount: f64,
    initial: usize,
    targets: Vec<usize>,
}

impl MdpBuilder {
    pub fn new(discount: f64) -> Self {
        Self {
            discount,
            ..Default::default()
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> usize {
        self.states.push(name.into());
        self.actions.push(Vec::new());
        self.trans.push(Vec::new());
        self.cost.push(Vec::new());
        self.states.len() - 1
    }

    /// Adds an action with the given successor distribution and cost.
    pub fn add_action(
        &mut self,
        s: usize,
        name: impl Into<String>,
        succ: &[(usize, f64)],
        cost: f64,
    ) -> usize {
        self.actions[s].push(name.into());
        self.trans[s].push(succ.to_vec());
        self.cost[s].push(cost);
        self.actions[s].len() - 1
    }

    pub fn initial(&mut self, s: usize) -> &mut Self {
        self.initial = s;
        self
    }

    pub fn target(&mut self, s: usize) -> &mut Self {
        if !self.targets.contains(&s) {
            self.targets.push(s);
        }
        self
    }

    pub fn discount(&mut self, beta: f64) -> &mut Self {
        self.discount = beta;
        self
    }

    /// Builds and validates.
    pub fn build(self) -> Result<Mdp> {
        let mdp = self.build_unchecked();
        let v = mdp.validate();
        if v.is_empty() {
            Ok(mdp)
        } else {
            Err(Error::InvalidMdp(v))
        }
    }

    /// Builds without validating; [`Mdp::validate`] reports what is wrong.
    pub fn build_unchecked(self) -> Mdp {
        let n = self.states.len();
        let mut index = HashMap::with_capacity(n);
        for (i, name) in self.states.iter().enumerate() {
            index.entry(name.clone()).or_insert(i);
        }
        let trans = self
            .trans
            .into_iter()
            .map(|rows| rows.into_iter().map(normalize_row).collect())
            .collect();
        let mut targets = self.targets;
        targets.sort_unstable();
        targets.dedup();
        let mut target = vec![false; n];
        for &t in targets.iter().filter(|&&t| t < n) {
            target[t] = true;
        }
        let origin = self
            .actions
            .iter()
            .map(|a| (0..a.len()).collect())
            .collect();
        Mdp {
            states: self.states,
            index,
            actions: self.actions,
            trans,
            cost: self.cost,
            discount: self.discount,
            initial: self.initial,
            targets,
            target,
            origin,
        }
    }
}

fn normalize_row(mut row: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    row.sort_by_key(|&(s, _)| s);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
    for (s, p) in row {
        match out.last_mut() {
            Some(last) if last.0 == s => last.1 += p,
            _ => out.push((s, p)),
        }
    }
    out.retain(|&(_, p)| p != 0.0);
    out
}

impl Mdp {
    /// Every broken invariant; empty when the MDP is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.states.len();
        let mut out = Vec::new();
        if n == 0 {
            out.push(Violation::NoStates);
        }
        for (i, name) in self.states.iter().enumerate() {
            if self.index.get(name) != Some(&i) {
                out.push(Violation::DuplicateState(name.clone()));
            }
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            out.push(Violation::Discount(self.discount));
        }
        if n > 0 && self.initial >= n {
            out.push(Violation::Initial(self.initial));
        }
        for &t in self.targets.iter().filter(|&&t| t >= n) {
            out.push(Violation::Target(t));
        }
        for s in 0..n {
            if self.actions[s].is_empty() {
                out.push(Violation::NoActions {
                    state: self.states[s].clone(),
                });
            }
            for a in 0..self.actions[s].len() {
                let here = || (self.states[s].clone(), self.actions[s][a].clone());
                let mut sum = 0.0;
                for &(t, p) in &self.trans[s][a] {
                    if t >= n {
                        let (state, action) = here();
                        out.push(Violation::DanglingSuccessor { state, action, succ: t });
                    }
                    if !(0.0..=1.0).contains(&p) {
                        let (state, action) = here();
                        out.push(Violation::Probability { state, action, succ: t, p });
                    }
                    sum += p;
                }
                if !((sum - 1.0).abs() <= tol::ROW_SUM) {
                    let (state, action) = here();
                    out.push(Violation::RowSum { state, action, sum });
                }
                let c = self.cost[s][a];
                if !(c.is_finite() && c >= 0.0) {
                    let (state, action) = here();
                    out.push(Violation::Cost { state, action, cost: c });
                }
                if self.target[s] {
                    let selfp = self.prob(s, a, s);
                    if (selfp - 1.0).abs() > tol::ROW_SUM {
                        let (state, action) = here();
                        out.push(Violation::TargetNotAbsorbing { state, action });
                    }
                }
            }
        }
        out
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn actions(&self, s: usize) -> &[String] {
        &self.actions[s]
    }

    pub fn num_actions(&self, s: usize) -> usize {
        self.actions[s].len()
    }

    pub fn action_id(&self, s: usize, name: &str) -> Option<usize> {
        self.actions[s].iter().position(|a| a == name)
    }

    /// Total number of state-action pairs.
    pub fn num_pairs(&self) -> usize {
        self.actions.iter().map(Vec::len).sum()
    }

    /// Sparse successor distribution of `(s, a)`, sorted by successor.
    pub fn transitions(&self, s: usize, a: usize) -> &[(usize, f64)] {
        &self.trans[s][a]
    }

    pub fn prob(&self, s: usize, a: usize, t: usize) -> f64 {
        self.trans[s][a]
            .binary_search_by_key(&t, |&(u, _)| u)
            .map(|i| self.trans[s][a][i].1)
            .unwrap_or(0.0)
    }

    pub fn cost(&self, s: usize, a: usize) -> f64 {
        self.cost[s][a]
    }

    /// Cost table indexed `[s][a]`.
    pub fn costs(&self) -> &[Vec<f64>] {
        &self.cost
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_target(&self, s: usize) -> bool {
        self.target[s]
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// Index of action `a` of `s` in the MDP this one was restricted from
    /// (the identity for MDPs built directly).
    pub fn origin(&self, s: usize, a: usize) -> usize {
        self.origin[s][a]
    }

    /// True when every transition probability is 0 or 1.
    pub fn has_deterministic_transitions(&self) -> bool {
        self.trans
            .iter()
            .flatten()
            .all(|row| row.len() == 1 && row[0].1 == 1.0)
    }

    /// Largest cost over all pairs.
    pub fn max_cost(&self) -> f64 {
        self.cost.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Keeps the actions for which `keep(s, a)` holds.
    ///
    /// The result remembers where each surviving action came from, so a
    /// policy on it can be lifted back with [`crate::StationaryPolicy::lift`].
    pub fn restrict(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Result<Mdp> {
        let mut out = self.clone();
        for s in 0..self.num_states() {
            let kept: Vec<usize> = (0..self.num_actions(s)).filter(|&a| keep(s, a)).collect();
            if kept.is_empty() {
                return Err(Error::EmptyActionSet(self.states[s].clone()));
            }
            out.actions[s] = kept.iter().map(|&a| self.actions[s][a].clone()).collect();
            out.trans[s] = kept.iter().map(|&a| self.trans[s][a].clone()).collect();
            out.cost[s] = kept.iter().map(|&a| self.cost[s][a]).collect();
            out.origin[s] = kept.iter().map(|&a| self.origin[s][a]).collect();
        }
        Ok(out)
    }

    /// Same structure with a new cost table.
    pub fn with_costs(&self, cost: Vec<Vec<f64>>) -> Result<Mdp> {
        let mut out = self.clone();
        out.cost = cost;
        out.checked()
    }

    /// Same structure with a new discount factor.
    pub fn with_discount(&self, beta: f64) -> Result<Mdp> {
        let mut out = self.clone();
        out.discount = beta;
        out.checked()
    }

    /// Forgets restriction history so that action indices are their own
    /// origin.
    pub fn rebase(&self) -> Mdp {
        let mut out = self.clone();
        out.origin = self.actions.iter().map(|a| (0..a.len()).collect()).collect();
        out
    }

    fn checked(self) -> Result<Mdp> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidMdp(v))
        }
    }
}
