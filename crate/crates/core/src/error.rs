use reachsynth_lp::LpError;
use thiserror::Error;

use crate::mdp::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid MDP: {}", join(.0))]
    InvalidMdp(Vec<Violation>),
    #[error("policy does not fit the MDP: {0}")]
    PolicyMismatch(String),
    #[error("singular linear system while {0}")]
    Singular(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("{what}: solver returned {status}")]
    Solver { what: String, status: String },
    #[error("epsilon' = {value} is outside (0, {bound}]")]
    EpsilonRange { value: f64, bound: f64 },
    #[error("perturbation search gave up after {halvings} halvings (last gamma sum {gamma_sum})")]
    NoConvergence { halvings: usize, gamma_sum: f64 },
    #[error("state `{0}` has no maximizing action")]
    EmptyActionSet(String),
    #[error("costs must vanish on target and zero-reach states; offending pairs: {}", .0.join(", "))]
    CostAssumption(Vec<String>),
    #[error("{count:.0} deterministic policies exceed the enumeration limit of {limit:.0}")]
    TooManyPolicies { count: f64, limit: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
