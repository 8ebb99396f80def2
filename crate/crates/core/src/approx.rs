//! Deterministic policies from two occupation-measure LPs over a
//! horizon-discounted surrogate cost, with a suboptimality certificate.

use nalgebra::DVector;
use reachsynth_lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};

use crate::chain::{forward_closure, induced_chain, recurrent_states, restricted_solve};
use crate::discount::{evaluate_cost, optimal_values};
use crate::error::{Error, Result};
use crate::exact::big_m;
use crate::graph::StatePartition;
use crate::mdp::Mdp;
use crate::policy::StationaryPolicy;
use crate::reach::{cleanup, max_reach, reach_prob, ReachAnalysis};
use crate::tol;

/// Surrogate costs `β^(T_min(s)-1) c(s, a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModifiedCosts {
    pub table: Vec<Vec<f64>>,
    /// States not reachable from the initial state; their cost is 0.
    pub unreachable: Vec<usize>,
    /// Pairs on `B ∪ S0` whose positive cost was dropped.
    pub zeroed: Vec<(usize, usize)>,
}

/// Scales each cost by the discount accrued before its state can first be
/// visited.
///
/// Costs on `B ∪ S0` must be zero; with `zero_out` they are dropped and
/// listed instead of rejected.
pub fn modified_costs(mdp: &Mdp, part: &StatePartition, zero_out: bool) -> Result<ModifiedCosts> {
    let beta = mdp.discount();
    let mut offending = Vec::new();
    let mut unreachable = Vec::new();
    let mut table = Vec::with_capacity(mdp.num_states());
    for s in 0..mdp.num_states() {
        let boundary = !part.is_rest(s);
        let tmin = part.tmin(s);
        if tmin.is_none() {
            unreachable.push(s);
        }
        let row = (0..mdp.num_actions(s))
            .map(|a| {
                let c = mdp.cost(s, a);
                if boundary {
                    if c != 0.0 {
                        offending.push((s, a));
                    }
                    return 0.0;
                }
                match tmin {
                    Some(t) => beta.powi(t as i32 - 1) * c,
                    None => 0.0,
                }
            })
            .collect();
        table.push(row);
    }
    if !offending.is_empty() && !zero_out {
        return Err(Error::CostAssumption(
            offending
                .iter()
                .map(|&(s, a)| format!("({}, {})", mdp.state_name(s), mdp.actions(s)[a]))
                .collect(),
        ));
    }
    Ok(ModifiedCosts {
        table,
        unreachable,
        zeroed: offending,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateSolution {
    pub value: f64,
    /// Undiscounted occupation of `(s, a)`; zero off `Sr`.
    pub occupation: Vec<Vec<f64>>,
}

struct OccupationLp {
    lp: LinearProgram,
    col: Vec<Vec<Option<usize>>>,
}

/// Undiscounted balance over `Sr` and the maximum-reach equality, with the
/// given objective on each `Sr` pair.
fn occupation_lp(
    mdp: &Mdp,
    ra: &ReachAnalysis,
    objective: impl Fn(usize, usize) -> f64,
) -> OccupationLp {
    let part = &ra.partition;
    let n = mdp.num_states();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let mut col = vec![Vec::new(); n];
    for s in 0..n {
        col[s] = (0..mdp.num_actions(s))
            .map(|a| {
                part.is_rest(s).then(|| {
                    lp.add_var(
                        format!("l[{},{}]", mdp.state_name(s), mdp.actions(s)[a]),
                        objective(s, a),
                    )
                })
            })
            .collect();
    }
    let mut inflow: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut reach = Vec::new();
    for s in part.rest() {
        for a in 0..mdp.num_actions(s) {
            let j = col[s][a].expect("Sr column");
            let mut r = 0.0;
            for &(t, p) in mdp.transitions(s, a) {
                inflow[t].push((j, p));
                if mdp.is_target(t) {
                    r += p;
                }
            }
            if r != 0.0 {
                reach.push((j, r));
            }
        }
    }
    let s1 = mdp.initial();
    for s in part.rest() {
        let mut coeffs: Vec<(usize, f64)> = col[s].iter().flatten().map(|&j| (j, 1.0)).collect();
        coeffs.extend(inflow[s].iter().map(|&(j, p)| (j, -p)));
        let alpha = if s == s1 { 1.0 } else { 0.0 };
        lp.add_row(format!("balance[{}]", mdp.state_name(s)), coeffs, Relation::Eq, alpha);
    }
    lp.add_row("reach", reach, Relation::Eq, ra.x[s1]);
    OccupationLp { lp, col }
}

fn solve_occupation(mdp: &Mdp, olp: &OccupationLp, what: &str) -> Result<(f64, Vec<Vec<f64>>)> {
    let sol = solve_lp(&olp.lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver {
            what: what.to_string(),
            status: format!("{:?}", sol.status),
        });
    }
    let occ = (0..mdp.num_states())
        .map(|s| {
            olp.col[s]
                .iter()
                .map(|j| j.map_or(0.0, |j| sol.x[j].max(0.0)))
                .collect()
        })
        .collect();
    Ok((sol.objective, occ))
}

fn zero_occupation(mdp: &Mdp) -> Vec<Vec<f64>> {
    (0..mdp.num_states())
        .map(|s| vec![0.0; mdp.num_actions(s)])
        .collect()
}

/// Minimum expected total `costs` over policies reaching `B` with maximum
/// probability, with an optimal occupation measure.
pub fn solve_surrogate_lp(
    mdp: &Mdp,
    ra: &ReachAnalysis,
    costs: &[Vec<f64>],
) -> Result<SurrogateSolution> {
    if !ra.partition.is_rest(mdp.initial()) {
        return Ok(SurrogateSolution {
            value: 0.0,
            occupation: zero_occupation(mdp),
        });
    }
    let olp = occupation_lp(mdp, ra, |s, a| costs[s][a]);
    let (value, occupation) = solve_occupation(mdp, &olp, "surrogate LP")?;
    Ok(SurrogateSolution { value, occupation })
}

/// Among occupation measures attaining `v_star`, one of least total mass.
///
/// If rounding in the first LP makes the cost equality infeasible, it is
/// retried as `≤ v⋆ + 1e-9·max(1, |v⋆|)`.
pub fn solve_selection_lp(
    mdp: &Mdp,
    ra: &ReachAnalysis,
    costs: &[Vec<f64>],
    v_star: f64,
) -> Result<Vec<Vec<f64>>> {
    if !ra.partition.is_rest(mdp.initial()) {
        return Ok(zero_occupation(mdp));
    }
    let mut olp = occupation_lp(mdp, ra, |_, _| 1.0);
    let coeffs: Vec<(usize, f64)> = (0..mdp.num_states())
        .flat_map(|s| {
            let col = &olp.col[s];
            (0..col.len()).filter_map(move |a| col[a].map(|j| (j, costs[s][a])))
        })
        .filter(|&(_, c)| c != 0.0)
        .collect();
    let row = olp.lp.add_row("surrogate", coeffs, Relation::Eq, v_star);
    if let Ok((_, occ)) = solve_occupation(mdp, &olp, "selection LP") {
        return Ok(occ);
    }
    let relaxed = olp.lp.row_mut(row);
    relaxed.relation = Relation::Le;
    relaxed.rhs = v_star + 1e-9 * v_star.abs().max(1.0);
    Ok(solve_occupation(mdp, &olp, "selection LP")?.1)
}

/// Lowest-index supported action in visited states; elsewhere the lowest
/// reach-preserving action.
pub fn extract_policy(mdp: &Mdp, ra: &ReachAnalysis, occupation: &[Vec<f64>]) -> StationaryPolicy {
    let choice: Vec<usize> = (0..mdp.num_states())
        .map(|s| {
            occupation[s]
                .iter()
                .position(|&l| l > tol::SUPPORT)
                .unwrap_or(if ra.partition.is_rest(s) { ra.amax[s][0] } else { 0 })
        })
        .collect();
    StationaryPolicy::deterministic(mdp, &choice)
}

/// Expected total undiscounted `costs` of `pol` from the initial state;
/// infinite if a reachable recurrent state has positive cost.
pub fn surrogate_value(mdp: &Mdp, pol: &StationaryPolicy, costs: &[Vec<f64>]) -> Result<f64> {
    let chain = induced_chain(mdp, pol)?;
    let n = mdp.num_states();
    let c = DVector::from_fn(n, |s, _| {
        pol.row(s).iter().zip(&costs[s]).map(|(p, c)| p * c).sum::<f64>()
    });
    let s1 = mdp.initial();
    let reachable = forward_closure(&chain.p, &[s1]);
    let recurrent = recurrent_states(&chain.p);
    if (0..n).any(|s| reachable[s] && recurrent[s] && c[s] > 0.0) {
        return Ok(f64::INFINITY);
    }
    if recurrent[s1] {
        return Ok(0.0);
    }
    let transient: Vec<bool> = (0..n).map(|s| reachable[s] && !recurrent[s]).collect();
    let z = restricted_solve(&chain.p, &transient, &c, "evaluating surrogate cost")?;
    Ok(z[s1])
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxCertificate {
    /// Least cost over `Sr` pairs.
    pub cmin: f64,
    /// Largest surrogate cost over `Sr` pairs.
    pub ctilde_max: f64,
    /// Least expected number of steps in `Sr` among reach-optimal policies.
    pub m_under: f64,
    /// Stand-in for the largest expected number of steps in `Sr`.
    pub m_upper: f64,
    /// Whether `m_upper` is a proven bound (deterministic transitions).
    pub m_upper_certified: bool,
    /// `m_under · cmin`.
    pub lower_bound: f64,
    /// `m_upper · c̃max`.
    pub upper_bound: f64,
    /// `m_upper · c̃max − m_under · cmin`.
    pub gap_bound: f64,
    /// `|S| · c̃max`, for deterministic transitions only.
    pub gap_bound_deterministic: Option<f64>,
    /// `cmin` times the least expected discounted number of steps in `Sr`
    /// over reach-preserving policies.
    pub discounted_lower_bound: f64,
}

pub fn suboptimality_certificate(
    mdp: &Mdp,
    ra: &ReachAnalysis,
    ctilde: &[Vec<f64>],
    k: u32,
) -> Result<ApproxCertificate> {
    let part = &ra.partition;
    let rest = part.rest();
    let pairs = || {
        rest.iter()
            .flat_map(|&s| (0..mdp.num_actions(s)).map(move |a| (s, a)))
    };
    let cmin = pairs().map(|(s, a)| mdp.cost(s, a)).fold(f64::INFINITY, f64::min);
    let cmin = if cmin.is_finite() { cmin } else { 0.0 };
    let ctilde_max = pairs().map(|(s, a)| ctilde[s][a]).fold(0.0, f64::max);

    let m_under = if part.is_rest(mdp.initial()) {
        let olp = occupation_lp(mdp, ra, |_, _| 1.0);
        solve_occupation(mdp, &olp, "expected-steps LP")?.0
    } else {
        0.0
    };
    let bm = big_m(mdp, k);
    let deterministic = mdp.has_deterministic_transitions();

    let steps_cost: Vec<Vec<f64>> = (0..mdp.num_states())
        .map(|s| vec![if part.is_rest(s) { 1.0 } else { 0.0 }; mdp.num_actions(s)])
        .collect();
    let mdp_prime = cleanup(mdp, ra)?.with_costs(
        (0..mdp.num_states())
            .map(|s| vec![steps_cost[s][0]; ra.amax[s].len()])
            .collect(),
    )?;
    let discounted_steps = optimal_values(&mdp_prime)?.y[mdp.initial()];

    Ok(ApproxCertificate {
        cmin,
        ctilde_max,
        m_under,
        m_upper: bm.value,
        m_upper_certified: bm.certified,
        lower_bound: m_under * cmin,
        upper_bound: bm.value * ctilde_max,
        gap_bound: bm.value * ctilde_max - m_under * cmin,
        gap_bound_deterministic: deterministic.then(|| mdp.num_states() as f64 * ctilde_max),
        discounted_lower_bound: cmin * discounted_steps,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ApproxOptions {
    pub k: u32,
    /// Drop positive costs on `B ∪ S0` instead of rejecting the MDP.
    pub zero_out: bool,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self {
            k: crate::exact::DEFAULT_K,
            zero_out: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ApproxSynthesis {
    pub policy: StationaryPolicy,
    pub cost: f64,
    pub surrogate: f64,
    pub reach: f64,
    pub x_initial: f64,
    pub v_star: f64,
    pub costs: ModifiedCosts,
    pub certificate: ApproxCertificate,
}

/// Runs both LPs on the surrogate costs and extracts a deterministic policy.
pub fn synth_approx(mdp: &Mdp, opts: &ApproxOptions) -> Result<ApproxSynthesis> {
    let ra = max_reach(mdp)?;
    let costs = modified_costs(mdp, &ra.partition, opts.zero_out)?;
    let (policy, v_star) = lp_policy(mdp, &ra, &costs.table)?;
    let certificate = suboptimality_certificate(mdp, &ra, &costs.table, opts.k)?;
    Ok(ApproxSynthesis {
        cost: evaluate_cost(mdp, &policy)?,
        surrogate: surrogate_value(mdp, &policy, &costs.table)?,
        reach: reach_prob(mdp, &policy)?,
        x_initial: ra.x[mdp.initial()],
        policy,
        v_star,
        costs,
        certificate,
    })
}

/// The two-LP pipeline for an arbitrary nonnegative cost table on `Sr`.
pub fn lp_policy(
    mdp: &Mdp,
    ra: &ReachAnalysis,
    costs: &[Vec<f64>],
) -> Result<(StationaryPolicy, f64)> {
    let first = solve_surrogate_lp(mdp, ra, costs)?;
    let occ = solve_selection_lp(mdp, ra, costs, first.value)?;
    Ok((extract_policy(mdp, ra, &occ), first.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::fixtures::*;
    use crate::mdp::MdpBuilder;

    fn ctilde(m: &Mdp) -> (ReachAnalysis, Vec<Vec<f64>>) {
        let ra = max_reach(m).unwrap();
        let c = modified_costs(m, &ra.partition, false).unwrap().table;
        (ra, c)
    }

    #[test]
    fn two_path_costs() {
        let (_, c) = ctilde(&two_path(0.5));
        assert_eq!(c[0], vec![2.0, 1.0]);
        assert_eq!(c[1], vec![0.5]);
        assert_eq!(c[2], vec![0.0]);
    }

    #[test]
    fn deep_state_cost() {
        // Chain s1 -> u -> w with w at hop distance 3.
        let mut b = MdpBuilder::new(0.9);
        let s1 = b.add_state("s1");
        let u = b.add_state("u");
        let w = b.add_state("w");
        let g = b.add_state("g");
        b.add_action(s1, "x", &[(u, 1.0)], 1.0);
        b.add_action(u, "x", &[(w, 1.0)], 1.0);
        b.add_action(w, "x", &[(g, 1.0)], 4.0);
        b.add_action(g, "x", &[(g, 1.0)], 0.0);
        b.initial(s1).target(g);
        let (_, c) = ctilde(&b.build().unwrap());
        assert_eq!(c[0][0], 1.0);
        assert!((c[2][0] - 3.24).abs() < 1e-12);
    }

    #[test]
    fn boundary_cost_rejected_unless_zeroed() {
        let m = fig1_trap(0.5).with_costs(vec![vec![0.0, 1.0], vec![0.0], vec![2.0]]).unwrap();
        let ra = max_reach(&m).unwrap();
        assert!(matches!(
            modified_costs(&m, &ra.partition, false),
            Err(Error::CostAssumption(v)) if v == ["(z, a)"]
        ));
        let mc = modified_costs(&m, &ra.partition, true).unwrap();
        assert_eq!(mc.zeroed, vec![(2, 0)]);
        assert_eq!(mc.table[2], vec![0.0]);
    }

    #[test]
    fn two_path_lps() {
        let m = two_path(0.5);
        let (ra, c) = ctilde(&m);
        let first = solve_surrogate_lp(&m, &ra, &c).unwrap();
        assert!((first.value - 1.5).abs() < 1e-9);
        let occ = solve_selection_lp(&m, &ra, &c, first.value).unwrap();
        assert!((occ[0][1] - 1.0).abs() < 1e-9 && occ[0][0].abs() < 1e-9);
        assert!((occ[1][0] - 1.0).abs() < 1e-9);
        let p = extract_policy(&m, &ra, &occ);
        assert_eq!((p.action(0), p.action(1)), (Some(1), Some(0)));
    }

    #[test]
    fn fig1_lps() {
        let m = fig1(0.5);
        let (ra, c) = ctilde(&m);
        let first = solve_surrogate_lp(&m, &ra, &c).unwrap();
        assert!((first.value - 1.0).abs() < 1e-9);
        let occ = solve_selection_lp(&m, &ra, &c, first.value).unwrap();
        assert!((occ[0][1] - 1.0).abs() < 1e-9);
        assert_eq!(extract_policy(&m, &ra, &occ).action(0), Some(1));
    }

    #[test]
    fn zero_costs_zero_value() {
        let m = two_path(0.5).with_costs(vec![vec![0.0, 0.0], vec![0.0], vec![0.0]]).unwrap();
        let (ra, c) = ctilde(&m);
        assert_eq!(solve_surrogate_lp(&m, &ra, &c).unwrap().value, 0.0);
        let cert = suboptimality_certificate(&m, &ra, &c, 100).unwrap();
        assert_eq!((cert.lower_bound, cert.upper_bound, cert.gap_bound), (0.0, 0.0, 0.0));
        let u = StationaryPolicy::uniform(&m);
        assert_eq!(surrogate_value(&m, &u, &c).unwrap(), 0.0);
    }

    #[test]
    fn single_action_occupation_is_visit_count() {
        let mut b = MdpBuilder::new(0.5);
        let s = b.add_state("s");
        let g = b.add_state("g");
        b.add_action(s, "x", &[(s, 0.75), (g, 0.25)], 1.0);
        b.add_action(g, "x", &[(g, 1.0)], 0.0);
        b.initial(s).target(g);
        let m = b.build().unwrap();
        let (ra, c) = ctilde(&m);
        let first = solve_surrogate_lp(&m, &ra, &c).unwrap();
        let occ = solve_selection_lp(&m, &ra, &c, first.value).unwrap();
        assert!((occ[0][0] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn unvisited_state_falls_back_to_amax() {
        // `u` is only reachable through the losing branch, and its first
        // action drops reach.
        let mut b = MdpBuilder::new(0.5);
        let s1 = b.add_state("s1");
        let u = b.add_state("u");
        let g = b.add_state("g");
        let z = b.add_state("z");
        b.add_action(s1, "go", &[(g, 1.0)], 1.0);
        b.add_action(s1, "detour", &[(u, 1.0)], 5.0);
        b.add_action(u, "lose", &[(z, 1.0)], 0.0);
        b.add_action(u, "win", &[(g, 1.0)], 0.0);
        b.add_action(g, "x", &[(g, 1.0)], 0.0);
        b.add_action(z, "x", &[(z, 1.0)], 0.0);
        b.initial(s1).target(g);
        let m = b.build().unwrap();
        let (ra, c) = ctilde(&m);
        let (p, _) = lp_policy(&m, &ra, &c).unwrap();
        assert_eq!(p.action(0), Some(0));
        assert_eq!(p.action(1), Some(1));
    }

    #[test]
    fn surrogate_values() {
        let m = two_path(0.5);
        let (_, c) = ctilde(&m);
        let bc = StationaryPolicy::deterministic(&m, &[1, 0, 0]);
        let a = StationaryPolicy::deterministic(&m, &[0, 0, 0]);
        assert!((surrogate_value(&m, &bc, &c).unwrap() - 1.5).abs() < 1e-12);
        assert!((surrogate_value(&m, &a, &c).unwrap() - 2.0).abs() < 1e-12);
        let f = fig1(0.5).with_costs(vec![vec![1.0, 1.0], vec![0.0]]).unwrap();
        let stuck = StationaryPolicy::deterministic(&f, &[0, 0]);
        assert_eq!(surrogate_value(&f, &stuck, f.costs()).unwrap(), f64::INFINITY);
    }

    #[test]
    fn two_path_certificate() {
        let m = two_path(0.5);
        let (ra, c) = ctilde(&m);
        let cert = suboptimality_certificate(&m, &ra, &c, 100).unwrap();
        assert_eq!(cert.cmin, 1.0);
        assert_eq!(cert.ctilde_max, 2.0);
        assert!((cert.m_under - 1.0).abs() < 1e-9);
        assert_eq!(cert.gap_bound_deterministic, Some(6.0));
        assert!(cert.m_upper_certified);
        let f = fig1(0.5);
        let (ra, c) = ctilde(&f);
        let cert = suboptimality_certificate(&f, &ra, &c, 100).unwrap();
        assert!((cert.m_under - 1.0).abs() < 1e-9);
        assert_eq!(cert.lower_bound, 0.0);
    }

    #[test]
    fn synth_two_path() {
        let out = synth_approx(&two_path(0.5), &ApproxOptions::default()).unwrap();
        assert!((out.cost - 1.5).abs() < 1e-12);
        assert!((out.surrogate - out.v_star).abs() < 1e-9);
        assert_eq!(out.reach, 1.0);
    }
}
