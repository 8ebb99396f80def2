//! Depth-first branch and bound over `{0, 1}` variables.

use std::time::{Duration, Instant};

use crate::model::{LpError, MixedIntegerProgram, Sense};
use crate::simplex::{solve_lp_with, LpSolution, LpStatus, SimplexOptions};

#[derive(Clone, Copy, Debug)]
pub struct MilpOptions {
    pub time_limit: Option<Duration>,
    /// Absolute optimality gap at which a node is pruned.
    pub gap_tol: f64,
    /// Distance from an integer below which a binary counts as integral.
    pub integrality_tol: f64,
    pub node_limit: Option<usize>,
    pub simplex: SimplexOptions,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            time_limit: None,
            gap_tol: 1e-6,
            integrality_tol: 1e-7,
            node_limit: None,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Time limit hit; `incumbent` holds the best solution found, if any.
    Timeout,
    NodeLimit,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NodeStats {
    pub nodes: usize,
    pub lp_iterations: usize,
    pub incumbent_updates: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub incumbent: Option<LpSolution>,
    /// Best proven bound on the optimum, in the program's own sense.
    pub bound: f64,
    pub stats: NodeStats,
}

impl MilpSolution {
    pub fn objective(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|s| s.objective)
    }

    /// Absolute gap between incumbent and bound (infinite without incumbent).
    pub fn gap(&self) -> f64 {
        match self.objective() {
            Some(obj) => (obj - self.bound).abs(),
            None => f64::INFINITY,
        }
    }
}

struct Node {
    fixings: Vec<(usize, f64)>,
    /// Relaxation value of the parent, in minimization orientation.
    parent_bound: f64,
}

/// Solves `mip` by LP-relaxation branch and bound.
///
/// Branching picks the most fractional binary (lowest index on ties) and
/// explores the child nearest the relaxation value first. Exploration is
/// sequential, so results are reproducible for a fixed input.
pub fn solve_milp(mip: &MixedIntegerProgram, opts: &MilpOptions) -> Result<MilpSolution, LpError> {
    mip.check()?;
    let start = Instant::now();
    let dir = match mip.lp.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut stats = NodeStats::default();
    let mut incumbent: Option<LpSolution> = None;
    let mut best = f64::INFINITY;
    let mut stack = vec![Node {
        fixings: Vec::new(),
        parent_bound: f64::NEG_INFINITY,
    }];
    let mut status = MilpStatus::Optimal;
    let mut saw_numerical_failure = false;

    while let Some(node) = stack.pop() {
        if let Some(limit) = opts.time_limit {
            if start.elapsed() >= limit {
                stack.push(node);
                status = MilpStatus::Timeout;
                break;
            }
        }
        if let Some(limit) = opts.node_limit {
            if stats.nodes >= limit {
                stack.push(node);
                status = MilpStatus::NodeLimit;
                break;
            }
        }
        if node.parent_bound >= best - opts.gap_tol {
            continue;
        }
        stats.nodes += 1;

        let mut lp = mip.lp.clone();
        for &(j, v) in &node.fixings {
            lp.set_bounds(j, v, v);
        }
        let relax = solve_lp_with(&lp, &opts.simplex)?;
        stats.lp_iterations += relax.iterations;
        match relax.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if node.fixings.is_empty() {
                    stats.elapsed = start.elapsed();
                    return Ok(MilpSolution {
                        status: MilpStatus::Unbounded,
                        incumbent: None,
                        bound: dir * f64::NEG_INFINITY,
                        stats,
                    });
                }
                continue;
            }
            LpStatus::NumericalFailure => {
                saw_numerical_failure = true;
                continue;
            }
        }
        let value = dir * relax.objective;
        if value >= best - opts.gap_tol {
            continue;
        }

        let branch = pick_branch(mip.binaries(), &relax.x, opts.integrality_tol);
        match branch {
            None => {
                // Integral: re-solve with every binary pinned so the continuous
                // part is exact for this assignment.
                let mut fixed = mip.lp.clone();
                let assignment: Vec<(usize, f64)> = mip
                    .binaries()
                    .iter()
                    .map(|&j| (j, relax.x[j].round()))
                    .collect();
                for &(j, v) in &assignment {
                    fixed.set_bounds(j, v, v);
                }
                let exact = solve_lp_with(&fixed, &opts.simplex)?;
                stats.lp_iterations += exact.iterations;
                if exact.status == LpStatus::Optimal {
                    let v = dir * exact.objective;
                    if v < best {
                        best = v;
                        incumbent = Some(exact);
                        stats.incumbent_updates += 1;
                    }
                } else if let Some(j) = most_off_integral(mip.binaries(), &relax.x) {
                    push_children(&mut stack, &node, j, relax.x[j], value);
                }
            }
            Some(j) => push_children(&mut stack, &node, j, relax.x[j], value),
        }
    }

    let open_bound = stack
        .iter()
        .map(|n| n.parent_bound)
        .fold(f64::INFINITY, f64::min);
    let bound = best.min(open_bound);
    if status == MilpStatus::Optimal && incumbent.is_none() {
        status = if saw_numerical_failure {
            MilpStatus::NumericalFailure
        } else {
            MilpStatus::Infeasible
        };
    }
    stats.elapsed = start.elapsed();
    Ok(MilpSolution {
        status,
        incumbent,
        bound: dir * bound,
        stats,
    })
}

fn pick_branch(binaries: &[usize], x: &[f64], tol: f64) -> Option<usize> {
    let mut pick = None;
    let mut best = tol;
    for &j in binaries {
        let frac = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
        if frac > best + 1e-12 {
            best = frac;
            pick = Some(j);
        } else if frac > tol && (frac - best).abs() <= 1e-12 {
            if let Some(p) = pick {
                if j < p {
                    pick = Some(j);
                }
            }
        }
    }
    pick
}

fn most_off_integral(binaries: &[usize], x: &[f64]) -> Option<usize> {
    binaries
        .iter()
        .copied()
        .filter(|&j| (x[j] - x[j].round()).abs() > 0.0)
        .max_by(|&a, &b| {
            let fa = (x[a] - x[a].round()).abs();
            let fb = (x[b] - x[b].round()).abs();
            fa.total_cmp(&fb).then(b.cmp(&a))
        })
}

fn push_children(stack: &mut Vec<Node>, node: &Node, j: usize, value: f64, bound: f64) {
    let preferred = if value >= 0.5 { 1.0 } else { 0.0 };
    for v in [1.0 - preferred, preferred] {
        let mut fixings = node.fixings.clone();
        fixings.push((j, v));
        stack.push(Node {
            fixings,
            parent_bound: bound,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearProgram, Relation};

    #[test]
    fn rounding_forced() {
        let mut mip = MixedIntegerProgram::new(LinearProgram::new(Sense::Minimize));
        let x = mip.add_binary("x", 1.0);
        mip.lp.add_row("lb", vec![(x, 1.0)], Relation::Ge, 0.3);
        let s = solve_milp(&mip, &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert_eq!(s.incumbent.unwrap().x[0], 1.0);
    }

    #[test]
    fn tiny_knapsack() {
        let mut mip = MixedIntegerProgram::new(LinearProgram::new(Sense::Maximize));
        let a = mip.add_binary("a", 3.0);
        let b = mip.add_binary("b", 2.0);
        mip.lp.add_row("cap", vec![(a, 1.0), (b, 1.0)], Relation::Le, 1.0);
        let s = solve_milp(&mip, &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert!((s.objective().unwrap() - 3.0).abs() < 1e-9);
        assert!(s.gap() < 1e-6);
    }

    #[test]
    fn infeasible_binary_program() {
        let mut mip = MixedIntegerProgram::new(LinearProgram::new(Sense::Minimize));
        let x = mip.add_binary("x", 1.0);
        let y = mip.add_binary("y", 1.0);
        mip.lp.add_row("half", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 1.5);
        let s = solve_milp(&mip, &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Infeasible);
        assert!(s.incumbent.is_none());
    }

    #[test]
    fn zero_time_limit_times_out() {
        let mut mip = MixedIntegerProgram::new(LinearProgram::new(Sense::Maximize));
        let a = mip.add_binary("a", 3.0);
        mip.lp.add_row("cap", vec![(a, 1.0)], Relation::Le, 1.0);
        let opts = MilpOptions {
            time_limit: Some(Duration::ZERO),
            ..Default::default()
        };
        let s = solve_milp(&mip, &opts).unwrap();
        assert_eq!(s.status, MilpStatus::Timeout);
        assert!(s.incumbent.is_none());
    }

    #[test]
    fn undeclared_binary_rejected() {
        let mut mip = MixedIntegerProgram::new(LinearProgram::new(Sense::Minimize));
        mip.binaries.push(4);
        assert_eq!(
            solve_milp(&mip, &MilpOptions::default()).unwrap_err(),
            LpError::UndeclaredBinary(4)
        );
    }
}
