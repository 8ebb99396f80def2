//! ε-optimal stationary policies by perturbing the unconstrained optimum so
//! that every reach-preserving action keeps positive probability.

use nalgebra::{DMatrix, DVector};

use crate::chain::{induced_chain, resolvent_solve, resolvent_solve_transposed};
use crate::discount::{evaluate_cost, optimal_values, DiscountAnalysis};
use crate::error::{Error, Result};
use crate::graph::{partition_states, StatePartition};
use crate::mdp::Mdp;
use crate::policy::StationaryPolicy;
use crate::reach::{cleanup, max_reach, reach_prob};
use crate::tol;

/// Perturbed policy together with the quantities certifying its cost.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub epsilon_prime: f64,
    /// Change of the induced kernel per unit of `ε′`.
    pub m: DMatrix<f64>,
    /// Change of the induced cost per unit of `ε′`.
    pub v: DVector<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    /// The perturbed policy, on the cleaned-up MDP.
    pub policy: StationaryPolicy,
    /// `|J(π̃′) − J(π̃) − ε′(γ₁ + γ₂)|` from two independent evaluations.
    pub identity_residual: f64,
}

impl Perturbation {
    /// Exact cost increase `ε′(γ₁ + γ₂)` over the unperturbed policy.
    pub fn cost_increase(&self) -> f64 {
        self.epsilon_prime * (self.gamma1 + self.gamma2)
    }
}

struct Split {
    act: Vec<Vec<usize>>,
    pass: Vec<Vec<usize>>,
}

fn split_actions(mdp_prime: &Mdp, part: &StatePartition, da: &DiscountAnalysis) -> Split {
    let n = mdp_prime.num_states();
    let mut act = vec![Vec::new(); n];
    let mut pass = vec![Vec::new(); n];
    for s in part.rest() {
        for a in 0..mdp_prime.num_actions(s) {
            if da.pitilde.prob(s, a) > 0.0 {
                act[s].push(a);
            } else {
                pass[s].push(a);
            }
        }
    }
    Split { act, pass }
}

/// Largest `ε′` keeping the perturbed policy nonnegative; `None` when there
/// is nothing to perturb.
pub fn nonnegativity_bound(mdp_prime: &Mdp, da: &DiscountAnalysis) -> Option<f64> {
    let part = partition_states(mdp_prime);
    bound_of(&split_actions(mdp_prime, &part, da), da)
}

fn bound_of(split: &Split, da: &DiscountAnalysis) -> Option<f64> {
    let mut bound: Option<f64> = None;
    for s in 0..split.act.len() {
        if split.pass[s].is_empty() {
            continue;
        }
        let ratio = split.act[s].len() as f64 / split.pass[s].len() as f64;
        for &a in &split.act[s] {
            let b = da.pitilde.prob(s, a) * ratio;
            bound = Some(bound.map_or(b, |x: f64| x.min(b)));
        }
    }
    bound
}

fn check_epsilon(split: &Split, da: &DiscountAnalysis, eps_prime: f64) -> Result<()> {
    let bound = bound_of(split, da).unwrap_or(f64::INFINITY);
    if !(eps_prime > 0.0 && eps_prime <= bound) {
        return Err(Error::EpsilonRange {
            value: eps_prime,
            bound,
        });
    }
    Ok(())
}

fn perturbed(split: &Split, da: &DiscountAnalysis, eps_prime: f64) -> StationaryPolicy {
    let rows = (0..split.act.len())
        .map(|s| {
            let mut row = da.pitilde.row(s).to_vec();
            if !split.pass[s].is_empty() && !split.act[s].is_empty() {
                let shift = eps_prime * split.pass[s].len() as f64 / split.act[s].len() as f64;
                for &a in &split.act[s] {
                    row[a] = (row[a] - shift).max(0.0);
                }
                for &a in &split.pass[s] {
                    row[a] = eps_prime;
                }
            }
            row
        })
        .collect();
    StationaryPolicy::from_rows(rows)
}

/// Moves mass `ε′` onto every unused reach-preserving action at `Sr`
/// states, taking it evenly from the used ones.
pub fn perturb_policy(
    mdp_prime: &Mdp,
    da: &DiscountAnalysis,
    eps_prime: f64,
) -> Result<StationaryPolicy> {
    let part = partition_states(mdp_prime);
    let split = split_actions(mdp_prime, &part, da);
    check_epsilon(&split, da, eps_prime)?;
    Ok(perturbed(&split, da, eps_prime))
}

/// Computes `M`, `v`, `γ₁`, `γ₂` for the perturbation of size `ε′` and checks
/// the additive cost identity against direct evaluation.
pub fn perturbation_certificate(
    mdp_prime: &Mdp,
    da: &DiscountAnalysis,
    eps_prime: f64,
) -> Result<Perturbation> {
    let part = partition_states(mdp_prime);
    let split = split_actions(mdp_prime, &part, da);
    check_epsilon(&split, da, eps_prime)?;
    let policy = perturbed(&split, da, eps_prime);

    let n = mdp_prime.num_states();
    let beta = mdp_prime.discount();
    let mut m = DMatrix::zeros(n, n);
    let mut v = DVector::zeros(n);
    for s in 0..n {
        if split.pass[s].is_empty() || split.act[s].is_empty() {
            continue;
        }
        let ratio = split.pass[s].len() as f64 / split.act[s].len() as f64;
        for &a in &split.pass[s] {
            for &(t, p) in mdp_prime.transitions(s, a) {
                m[(s, t)] += p;
            }
            v[s] += mdp_prime.cost(s, a);
        }
        for &a in &split.act[s] {
            for &(t, p) in mdp_prime.transitions(s, a) {
                m[(s, t)] -= ratio * p;
            }
            v[s] -= ratio * mdp_prime.cost(s, a);
        }
    }

    let base = induced_chain(mdp_prime, &da.pitilde)?;
    let pert = induced_chain(mdp_prime, &policy)?;
    // Row vector αᵀ(I − βP̃)⁻¹ and column (I − βP̃′)⁻¹c̃.
    let w = resolvent_solve_transposed(&base.p, beta, &base.alpha, "computing gamma1")?;
    let z = resolvent_solve(&pert.p, beta, &base.cost, "computing gamma1")?;
    let gamma1 = beta * w.dot(&(&m * z));
    let u = resolvent_solve_transposed(&pert.p, beta, &pert.alpha, "computing gamma2")?;
    let gamma2 = u.dot(&v);

    let j_base = evaluate_cost(mdp_prime, &da.pitilde)?;
    let j_pert = evaluate_cost(mdp_prime, &policy)?;
    let identity_residual = (j_pert - j_base - eps_prime * (gamma1 + gamma2)).abs();

    Ok(Perturbation {
        epsilon_prime: eps_prime,
        m,
        v,
        gamma1,
        gamma2,
        policy,
        identity_residual,
    })
}

/// Cap on halvings of `ε′`.
pub const MAX_HALVINGS: usize = 128;

#[derive(Clone, Debug)]
pub struct EpsilonSynthesis {
    /// Result policy on the input MDP.
    pub policy: StationaryPolicy,
    /// `None` when the unperturbed optimum was already feasible.
    pub perturbation: Option<Perturbation>,
    pub halvings: usize,
    /// Maximum reach probability from the initial state.
    pub x_initial: f64,
    /// Unconstrained optimum over reach-preserving policies.
    pub y_initial: f64,
    /// Exact cost and reach of `policy`.
    pub cost: f64,
    pub reach: f64,
}

/// Finds a reach-optimal stationary policy whose cost is within `eps` of
/// the infimum.
pub fn synth_eps_optimal(mdp: &Mdp, eps: f64) -> Result<EpsilonSynthesis> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    let ra = max_reach(mdp)?;
    let x1 = ra.x[mdp.initial()];
    let mdp_prime = cleanup(mdp, &ra)?;
    let da = optimal_values(&mdp_prime)?;
    let y1 = da.y[mdp.initial()];

    let base = da.pitilde.lift(&mdp_prime, mdp);
    let base_reach = reach_prob(mdp, &base)?;
    if (base_reach - x1).abs() <= tol::REPORT {
        return Ok(EpsilonSynthesis {
            cost: evaluate_cost(mdp, &base)?,
            reach: base_reach,
            policy: base,
            perturbation: None,
            halvings: 0,
            x_initial: x1,
            y_initial: y1,
        });
    }

    let Some(mut eps_prime) = nonnegativity_bound(&mdp_prime, &da) else {
        return Err(Error::NoConvergence {
            halvings: 0,
            gamma_sum: f64::NAN,
        });
    };
    let mut gamma_sum = f64::NAN;
    for halvings in 0..MAX_HALVINGS {
        let cert = perturbation_certificate(&mdp_prime, &da, eps_prime)?;
        gamma_sum = cert.gamma1 + cert.gamma2;
        let cheap = gamma_sum <= 1e-12 || eps_prime * gamma_sum <= eps;
        if cheap {
            let policy = cert.policy.lift(&mdp_prime, mdp);
            let reach = reach_prob(mdp, &policy)?;
            if (reach - x1).abs() <= tol::REPORT {
                return Ok(EpsilonSynthesis {
                    cost: evaluate_cost(mdp, &policy)?,
                    reach,
                    policy,
                    perturbation: Some(cert),
                    halvings,
                    x_initial: x1,
                    y_initial: y1,
                });
            }
        }
        eps_prime *= 0.5;
    }
    Err(Error::NoConvergence {
        halvings: MAX_HALVINGS,
        gamma_sum,
    })
}
