//! Policy files: one `state action [prob]` line per played action.
//!
//! ```text
//! reachsynth-policy 1
//! s1 a2
//! s2 stay 1
//! ```

use std::collections::HashSet;
use std::fmt::Write;

use super::mdp_format::number;
use super::Lines;
use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::policy::StationaryPolicy;

pub const POLICY_HEADER: &str = "reachsynth-policy";

/// Reads a policy for `mdp`. A missing probability means 1. Every state
/// needs at least one line and each row must sum to one.
pub fn parse_policy(text: &str, mdp: &Mdp) -> Result<StationaryPolicy> {
    let mut lines = Lines::new(text);
    lines.header(POLICY_HEADER, 1)?;
    let mut rows: Vec<Vec<f64>> = (0..mdp.num_states())
        .map(|s| vec![0.0; mdp.num_actions(s)])
        .collect();
    let mut seen = HashSet::new();
    let mut covered = vec![false; mdp.num_states()];
    while let Some((line, toks)) = lines.next_line() {
        let (s, a, p) = match toks.as_slice() {
            [s, a] => (*s, *a, 1.0),
            [s, a, p] => (*s, *a, number(line, "probability", p)?),
            _ => return Err(Error::parse(line, "expected `<state> <action> [prob]`")),
        };
        let sid = mdp
            .state_id(s)
            .ok_or_else(|| Error::parse(line, format!("unknown state `{s}`")))?;
        let aid = mdp
            .action_id(sid, a)
            .ok_or_else(|| Error::parse(line, format!("state `{s}` has no action `{a}`")))?;
        if !seen.insert((sid, aid)) {
            return Err(Error::parse(line, format!("duplicate entry {s} {a}")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::parse(line, format!("probability {p} outside [0, 1]")));
        }
        rows[sid][aid] = p;
        covered[sid] = true;
    }
    if let Some(s) = covered.iter().position(|c| !c) {
        return Err(Error::PolicyMismatch(format!(
            "no action given for state `{}`",
            mdp.state_name(s)
        )));
    }
    let pol = StationaryPolicy::from_rows(rows);
    pol.check(mdp)?;
    Ok(pol)
}

pub fn write_policy(mdp: &Mdp, pol: &StationaryPolicy) -> String {
    let mut out = format!("{POLICY_HEADER} 1\n");
    for (state, acts) in pol.describe(mdp) {
        for (a, p) in acts {
            if p == 1.0 {
                let _ = writeln!(out, "{state} {a}");
            } else {
                let _ = writeln!(out, "{state} {a} {p}");
            }
        }
    }
    out
}
