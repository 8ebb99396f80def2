//! Structured synthesis reports, text tables and CSV dumps.
//!
//! Reach and cost fields are always recomputed from the policy.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::approx::ApproxSynthesis;
use crate::discount::evaluate_cost;
use crate::epsilon::EpsilonSynthesis;
use crate::error::Result;
use crate::exact::ExactSynthesis;
use crate::existence::ExistenceCertificate;
use crate::grid::GridWorld;
use crate::mdp::Mdp;
use crate::policy::StationaryPolicy;
use crate::reach::{max_reach, reach_prob};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Eps,
    Exact,
    Approx,
    Existence,
    Undiscounted,
    DiscountedReach,
    Oracle,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Eps => "eps",
            Method::Exact => "exact",
            Method::Approx => "approx",
            Method::Existence => "existence",
            Method::Undiscounted => "undiscounted",
            Method::DiscountedReach => "discounted-reach",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyEntry {
    pub state: String,
    pub actions: Vec<(String, f64)>,
}

/// Non-finite values are written as the strings `"inf"`, `"-inf"`, `"nan"`.
mod extended {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Tag(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if x.is_finite() => s.serialize_some(x),
            Some(x) if x.is_nan() => s.serialize_some("nan"),
            Some(x) if *x > 0.0 => s.serialize_some("inf"),
            Some(_) => s.serialize_some("-inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Num(x)) => Ok(Some(x)),
            Some(Repr::Tag(t)) => match t.as_str() {
                "inf" => Ok(Some(f64::INFINITY)),
                "-inf" => Ok(Some(f64::NEG_INFINITY)),
                "nan" => Ok(Some(f64::NAN)),
                _ => Err(serde::de::Error::custom(format!("unexpected value `{t}`"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub method: Method,
    pub policy: Option<Vec<PolicyEntry>>,
    #[serde(with = "extended", default)]
    pub reach: Option<f64>,
    #[serde(with = "extended", default)]
    pub cost: Option<f64>,
    #[serde(with = "extended", default)]
    pub surrogate_cost: Option<f64>,
    pub x_initial: f64,
    pub bounds: BTreeMap<String, f64>,
    pub stats: BTreeMap<String, Value>,
    pub wall_time_secs: f64,
}

impl SynthesisReport {
    /// Report for `pol`, with reach and cost evaluated exactly.
    pub fn evaluate(method: Method, mdp: &Mdp, pol: Option<&StationaryPolicy>, wall: Duration) -> Result<Self> {
        let x_initial = max_reach(mdp)?.x_initial(mdp);
        let (policy, reach, cost) = match pol {
            Some(p) => (
                Some(
                    p.describe(mdp)
                        .into_iter()
                        .map(|(state, actions)| PolicyEntry { state, actions })
                        .collect(),
                ),
                Some(reach_prob(mdp, p)?),
                Some(evaluate_cost(mdp, p)?),
            ),
            None => (None, None, None),
        };
        Ok(SynthesisReport {
            method,
            policy,
            reach,
            cost,
            surrogate_cost: None,
            x_initial,
            bounds: BTreeMap::new(),
            stats: BTreeMap::new(),
            wall_time_secs: wall.as_secs_f64(),
        })
    }

    pub fn bound(mut self, name: &str, v: f64) -> Self {
        if v.is_finite() {
            self.bounds.insert(name.to_string(), v);
        }
        self
    }

    pub fn stat(mut self, name: &str, v: impl Into<Value>) -> Self {
        self.stats.insert(name.to_string(), v.into());
        self
    }

    pub fn from_eps(mdp: &Mdp, eps: f64, r: &EpsilonSynthesis, wall: Duration) -> Result<Self> {
        let mut rep = Self::evaluate(Method::Eps, mdp, Some(&r.policy), wall)?
            .bound("infimum", r.y_initial)
            .bound("cost_upper", r.y_initial + eps)
            .stat("eps", eps)
            .stat("halvings", r.halvings);
        if let Some(p) = &r.perturbation {
            rep = rep
                .stat("epsilon_prime", p.epsilon_prime)
                .stat("gamma1", p.gamma1)
                .stat("gamma2", p.gamma2);
        }
        Ok(rep)
    }

    pub fn from_exact(mdp: &Mdp, r: &ExactSynthesis, wall: Duration) -> Result<Self> {
        Ok(Self::evaluate(Method::Exact, mdp, Some(&r.policy), wall)?
            .bound("milp_objective", r.milp_objective)
            .bound("milp_bound", r.bound)
            .bound("big_m", r.big_m.value)
            .stat("status", format!("{:?}", r.status))
            .stat("nodes", r.nodes)
            .stat("lp_iterations", r.lp_iterations)
            .stat("big_m_certified", r.big_m.certified))
    }

    pub fn from_approx(mdp: &Mdp, r: &ApproxSynthesis, wall: Duration) -> Result<Self> {
        let c = &r.certificate;
        let mut rep = Self::evaluate(Method::Approx, mdp, Some(&r.policy), wall)?
            .bound("v_star", r.v_star)
            .bound("cmin", c.cmin)
            .bound("ctilde_max", c.ctilde_max)
            .bound("m_under", c.m_under)
            .bound("m_upper", c.m_upper)
            .bound("lower_bound", c.lower_bound)
            .bound("upper_bound", c.upper_bound)
            .bound("gap_bound", c.gap_bound)
            .bound("discounted_lower_bound", c.discounted_lower_bound)
            .stat("m_upper_certified", c.m_upper_certified);
        if let Some(g) = c.gap_bound_deterministic {
            rep = rep.bound("gap_bound_deterministic", g);
        }
        rep.surrogate_cost = Some(r.surrogate);
        Ok(rep)
    }

    pub fn from_existence(mdp: &Mdp, c: &ExistenceCertificate, wall: Duration) -> Result<Self> {
        let s1 = mdp.initial();
        Ok(Self::evaluate(Method::Existence, mdp, c.witness.as_ref(), wall)?
            .bound("infimum", c.infimum)
            .bound("xbar", c.xbar[s1])
            .stat("exists", c.exists))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.6}"),
        None => "-".into(),
    }
}

/// Side-by-side summary, one line per report.
pub fn render_table(reports: &[SynthesisReport]) -> String {
    let mut out = format!(
        "{:<17} {:>10} {:>12} {:>12} {:>12} {:>9}\n",
        "method", "reach", "J", "J~", "x(s1)", "time[s]"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<17} {:>10} {:>12} {:>12} {:>12.6} {:>9.3}",
            r.method.tag(),
            cell(r.reach),
            cell(r.cost),
            cell(r.surrogate_cost),
            r.x_initial,
            r.wall_time_secs
        );
    }
    out
}

/// One row per state, one column per named vector.
pub fn values_csv(mdp: &Mdp, columns: &[(&str, &[f64])]) -> String {
    let mut out = String::from("state");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for s in 0..mdp.num_states() {
        out.push_str(mdp.state_name(s));
        for (_, v) in columns {
            let _ = write!(out, ",{}", v[s]);
        }
        out.push('\n');
    }
    out
}

pub fn trajectory_csv(grid: &GridWorld, path: &[usize]) -> String {
    let mut out = String::from("step,state,x,y,risk\n");
    for (i, &s) in path.iter().enumerate() {
        let (x, y) = grid.cells[s];
        let risk = grid.risk_of(s).map_or('T', |r| r.symbol());
        let _ = writeln!(out, "{i},{},{x},{y},{risk}", grid.mdp.state_name(s));
    }
    out
}
