//! Markov chains induced by stationary policies, and the linear algebra on
//! them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::policy::StationaryPolicy;

/// `P^π`, `c^π` and the initial distribution `α`.
#[derive(Clone, Debug, PartialEq)]
pub struct InducedChain {
    pub p: DMatrix<f64>,
    pub cost: DVector<f64>,
    pub alpha: DVector<f64>,
}

/// Averages the kernel and costs of `mdp` under `pol`.
pub fn induced_chain(mdp: &Mdp, pol: &StationaryPolicy) -> Result<InducedChain> {
    pol.check(mdp)?;
    let n = mdp.num_states();
    let mut p = DMatrix::zeros(n, n);
    let mut cost = DVector::zeros(n);
    for s in 0..n {
        for (a, &w) in pol.row(s).iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for &(t, q) in mdp.transitions(s, a) {
                p[(s, t)] += w * q;
            }
            cost[s] += w * mdp.cost(s, a);
        }
        let sum: f64 = p.row(s).sum();
        if sum != 1.0 && sum > 0.0 {
            p.row_mut(s).unscale_mut(sum);
        }
    }
    let mut alpha = DVector::zeros(n);
    alpha[mdp.initial()] = 1.0;
    Ok(InducedChain { p, cost, alpha })
}

impl InducedChain {
    pub fn len(&self) -> usize {
        self.cost.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cost.is_empty()
    }

    /// Discounted cost-to-go `(I - βP)⁻¹ c` from every state.
    pub fn discounted_values(&self, beta: f64) -> Result<DVector<f64>> {
        resolvent_solve(&self.p, beta, &self.cost, "evaluating discounted cost")
    }

    /// States with positive probability of following `s`.
    pub fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.p
            .row(s)
            .iter()
            .enumerate()
            .filter(|(_, &q)| q > 0.0)
            .map(|(t, _)| t)
            .collect::<Vec<_>>()
            .into_iter()
    }

    /// Forward closure of the initial state.
    pub fn reachable_from_initial(&self) -> Vec<bool> {
        let s1 = self.alpha.iter().position(|&a| a > 0.0).unwrap_or(0);
        forward_closure(&self.p, &[s1])
    }
}

/// Solves `(I - βP) z = rhs`.
pub(crate) fn resolvent_solve(
    p: &DMatrix<f64>,
    beta: f64,
    rhs: &DVector<f64>,
    what: &str,
) -> Result<DVector<f64>> {
    let n = p.nrows();
    let a = DMatrix::identity(n, n) - p * beta;
    a.lu()
        .solve(rhs)
        .ok_or_else(|| Error::Singular(what.to_string()))
}

/// Solves `(I - βP)ᵀ w = rhs`, i.e. the row vector `rhsᵀ(I - βP)⁻¹`.
pub(crate) fn resolvent_solve_transposed(
    p: &DMatrix<f64>,
    beta: f64,
    rhs: &DVector<f64>,
    what: &str,
) -> Result<DVector<f64>> {
    let n = p.nrows();
    let a = DMatrix::identity(n, n) - p.transpose() * beta;
    a.lu()
        .solve(rhs)
        .ok_or_else(|| Error::Singular(what.to_string()))
}

/// Solves `(I - P_KK) z_K = rhs_K` over the states flagged in `keep` and
/// returns `z` padded with zeros.
pub(crate) fn restricted_solve(
    p: &DMatrix<f64>,
    keep: &[bool],
    rhs: &DVector<f64>,
    what: &str,
) -> Result<DVector<f64>> {
    let idx: Vec<usize> = (0..keep.len()).filter(|&s| keep[s]).collect();
    let k = idx.len();
    let mut out = DVector::zeros(keep.len());
    if k == 0 {
        return Ok(out);
    }
    let mut a = DMatrix::identity(k, k);
    let mut b = DVector::zeros(k);
    for (i, &s) in idx.iter().enumerate() {
        for (j, &t) in idx.iter().enumerate() {
            a[(i, j)] -= p[(s, t)];
        }
        b[i] = rhs[s];
    }
    let z = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular(what.to_string()))?;
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular(what.to_string()));
    }
    for (i, &s) in idx.iter().enumerate() {
        out[s] = z[i];
    }
    Ok(out)
}

/// States from which some state in `goal` is reachable along positive
/// entries of `p` (including the goal states themselves).
pub(crate) fn backward_closure(p: &DMatrix<f64>, goal: &[bool]) -> Vec<bool> {
    let n = p.nrows();
    let mut seen = goal.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&s| goal[s]).collect();
    while let Some(t) = stack.pop() {
        for s in 0..n {
            if !seen[s] && p[(s, t)] > 0.0 {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    seen
}

/// States reachable from `start` along positive entries of `p`.
pub(crate) fn forward_closure(p: &DMatrix<f64>, start: &[usize]) -> Vec<bool> {
    let n = p.nrows();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    for &s in start {
        if !seen[s] {
            seen[s] = true;
            stack.push(s);
        }
    }
    while let Some(s) = stack.pop() {
        for t in 0..n {
            if !seen[t] && p[(s, t)] > 0.0 {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    seen
}

/// Recurrent states: those that every state reachable from them can reach
/// back.
pub(crate) fn recurrent_states(p: &DMatrix<f64>) -> Vec<bool> {
    let n = p.nrows();
    let fwd: Vec<Vec<bool>> = (0..n).map(|s| forward_closure(p, &[s])).collect();
    (0..n)
        .map(|s| (0..n).all(|t| !fwd[s][t] || fwd[t][s]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::fixtures::*;

    #[test]
    fn fig1_half() {
        let m = fig1(0.5);
        let pol = StationaryPolicy::from_rows(vec![vec![0.5, 0.5], vec![1.0]]);
        let c = induced_chain(&m, &pol).unwrap();
        assert_eq!(c.p[(0, 0)], 0.5);
        assert_eq!(c.p[(0, 1)], 0.5);
        assert_eq!(c.cost[0], 0.5);
        assert_eq!(c.alpha.as_slice(), &[1.0, 0.0]);
        let det = StationaryPolicy::deterministic(&m, &[1, 0]);
        let c = induced_chain(&m, &det).unwrap();
        assert_eq!(c.p[(0, 1)], 1.0);
        assert_eq!(c.cost[0], 1.0);
    }

    /// Builds `P^π` entry by entry from `prob` lookups, independently of the
    /// sparse accumulation in `induced_chain`.
    fn brute_chain(m: &Mdp, pol: &StationaryPolicy) -> DMatrix<f64> {
        let n = m.num_states();
        DMatrix::from_fn(n, n, |s, t| {
            (0..m.num_actions(s)).map(|a| pol.prob(s, a) * m.prob(s, a, t)).sum()
        })
    }

    #[test]
    fn two_path_b_then_c() {
        let m = two_path(0.5);
        let pol = StationaryPolicy::deterministic(&m, &[1, 0, 0]);
        let c = induced_chain(&m, &pol).unwrap();
        assert_eq!(c.p, brute_chain(&m, &pol));
        assert_eq!(c.p[(0, 1)], 1.0);
        assert_eq!(c.p[(1, 2)], 1.0);
        assert_eq!(c.cost.as_slice(), &[1.0, 1.0, 0.0]);
        let u = StationaryPolicy::uniform(&m);
        assert_eq!(induced_chain(&m, &u).unwrap().p, brute_chain(&m, &u));
    }

    #[test]
    fn mismatched_policy_rejected() {
        let m = fig1(0.5);
        let pol = StationaryPolicy::from_rows(vec![vec![1.0], vec![1.0]]);
        assert!(matches!(induced_chain(&m, &pol), Err(Error::PolicyMismatch(_))));
    }

    #[test]
    fn recurrence() {
        let p = DMatrix::from_row_slice(3, 3, &[0.5, 0.5, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(recurrent_states(&p), vec![false, true, true]);
        assert_eq!(backward_closure(&p, &[true, false, false]), vec![true, false, false]);
        assert_eq!(forward_closure(&p, &[0]), vec![true, true, true]);
    }
}
