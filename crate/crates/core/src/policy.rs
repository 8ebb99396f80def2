use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::tol;

/// Stationary randomized policy: one distribution over `A(s)` per state.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryPolicy {
    probs: Vec<Vec<f64>>,
}

impl StationaryPolicy {
    /// Wraps per-state rows without checking them; see [`Self::check`].
    pub fn from_rows(probs: Vec<Vec<f64>>) -> Self {
        Self { probs }
    }

    /// Deterministic policy taking `choice[s]` in state `s`.
    pub fn deterministic(mdp: &Mdp, choice: &[usize]) -> Self {
        let probs = (0..mdp.num_states())
            .map(|s| {
                let mut row = vec![0.0; mdp.num_actions(s)];
                row[choice[s]] = 1.0;
                row
            })
            .collect();
        Self { probs }
    }

    pub fn uniform(mdp: &Mdp) -> Self {
        let probs = (0..mdp.num_states())
            .map(|s| {
                let k = mdp.num_actions(s);
                vec![1.0 / k as f64; k]
            })
            .collect();
        Self { probs }
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s][a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn num_states(&self) -> usize {
        self.probs.len()
    }

    /// Every row puts all mass on a single action.
    pub fn is_deterministic(&self) -> bool {
        self.probs.iter().all(|row| {
            row.iter().filter(|&&p| p == 1.0).count() == 1 && row.iter().all(|&p| p == 0.0 || p == 1.0)
        })
    }

    /// The action played in `s` if the row is a point mass.
    pub fn action(&self, s: usize) -> Option<usize> {
        let row = &self.probs[s];
        let a = row.iter().position(|&p| p == 1.0)?;
        row.iter()
            .enumerate()
            .all(|(b, &p)| b == a || p == 0.0)
            .then_some(a)
    }

    /// Checks shape and stochasticity against `mdp`.
    pub fn check(&self, mdp: &Mdp) -> Result<()> {
        if self.probs.len() != mdp.num_states() {
            return Err(Error::PolicyMismatch(format!(
                "policy has {} rows, MDP has {} states",
                self.probs.len(),
                mdp.num_states()
            )));
        }
        for (s, row) in self.probs.iter().enumerate() {
            let name = mdp.state_name(s);
            if row.len() != mdp.num_actions(s) {
                return Err(Error::PolicyMismatch(format!(
                    "state `{name}`: {} entries for {} actions",
                    row.len(),
                    mdp.num_actions(s)
                )));
            }
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::PolicyMismatch(format!(
                    "state `{name}`: probability {p} outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol::ROW_SUM {
                return Err(Error::PolicyMismatch(format!(
                    "state `{name}`: row sums to {sum}"
                )));
            }
        }
        Ok(())
    }

    /// Re-expresses a policy on a restriction of `root` as a policy on
    /// `root`, putting zero mass on the removed actions.
    pub fn lift(&self, restricted: &Mdp, root: &Mdp) -> StationaryPolicy {
        let probs = (0..root.num_states())
            .map(|s| {
                let mut row = vec![0.0; root.num_actions(s)];
                for (a, &p) in self.probs[s].iter().enumerate() {
                    row[restricted.origin(s, a)] += p;
                }
                row
            })
            .collect();
        StationaryPolicy { probs }
    }

    /// Inverse of [`Self::lift`]; `None` if the policy uses a removed action.
    pub fn project(&self, root: &Mdp, restricted: &Mdp) -> Option<StationaryPolicy> {
        let mut probs = Vec::with_capacity(root.num_states());
        for s in 0..root.num_states() {
            let row: Vec<f64> = (0..restricted.num_actions(s))
                .map(|a| self.probs[s][restricted.origin(s, a)])
                .collect();
            let kept: f64 = row.iter().sum();
            let total: f64 = self.probs[s].iter().sum();
            if (kept - total).abs() > tol::ROW_SUM {
                return None;
            }
            probs.push(row);
        }
        Some(StationaryPolicy { probs })
    }

    /// Names of the actions chosen by a deterministic policy, for display.
    pub fn describe(&self, mdp: &Mdp) -> Vec<(String, Vec<(String, f64)>)> {
        (0..mdp.num_states())
            .map(|s| {
                let acts = self.probs[s]
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(a, &p)| (mdp.actions(s)[a].clone(), p))
                    .collect();
                (mdp.state_name(s).to_string(), acts)
            })
            .collect()
    }
}
