//! Line-oriented MDP documents.
//!
//! ```text
//! reachsynth-mdp 1
//! discount 0.5
//! states s1 s2
//! initial s1
//! targets s2
//! actions s1 a1 a2
//! actions s2 stay
//! trans s1 a1 s1 1
//! trans s1 a2 s2 1
//! trans s2 stay s2 1
//! cost s1 a2 1
//! ```
//!
//! `#` starts a comment. Declarations must precede their use: a state must
//! appear in `states` before `actions` names it, and an action must be
//! declared before `trans` or `cost` mention it. Costs not listed are 0.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use super::Lines;
use crate::error::{Error, Result};
use crate::mdp::{Mdp, MdpBuilder};

pub const MDP_HEADER: &str = "reachsynth-mdp";
pub const MDP_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: String,
    pub action: String,
    pub succ: String,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostEntry {
    pub state: String,
    pub action: String,
    pub cost: f64,
}

/// Parsed document, kept in source order so that printing and re-parsing
/// gives back the same value.
#[derive(Clone, Debug, PartialEq)]
pub struct MdpDocument {
    pub version: u32,
    pub discount: f64,
    pub states: Vec<String>,
    pub initial: String,
    pub targets: Vec<String>,
    pub actions: Vec<(String, Vec<String>)>,
    pub transitions: Vec<Transition>,
    pub costs: Vec<CostEntry>,
}

pub(crate) fn number(line: usize, field: &str, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("{field}: `{tok}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{field}: `{tok}` is not finite")));
    }
    Ok(v)
}

impl MdpDocument {
    pub fn parse(text: &str) -> Result<MdpDocument> {
        let mut lines = Lines::new(text);
        let version = lines.header(MDP_HEADER, MDP_VERSION)?;
        let mut discount = None;
        let mut states: Vec<String> = Vec::new();
        let mut state_set = HashSet::new();
        let mut initial = None;
        let mut targets = None;
        let mut actions: Vec<(String, Vec<String>)> = Vec::new();
        let mut action_sets: HashMap<String, HashSet<String>> = HashMap::new();
        let mut transitions = Vec::new();
        let mut seen_trans = HashSet::new();
        let mut costs = Vec::new();
        let mut seen_cost = HashSet::new();

        let known_pair = |sets: &HashMap<String, HashSet<String>>, line, s: &str, a: &str| {
            match sets.get(s) {
                Some(set) if set.contains(a) => Ok(()),
                Some(_) => Err(Error::parse(line, format!("state `{s}` has no action `{a}`"))),
                None => Err(Error::parse(line, format!("state `{s}` has no actions declared"))),
            }
        };

        while let Some((line, toks)) = lines.next_line() {
            let (kw, rest) = (toks[0], &toks[1..]);
            match kw {
                "discount" => {
                    if discount.is_some() {
                        return Err(Error::parse(line, "discount given twice"));
                    }
                    let [b] = rest else {
                        return Err(Error::parse(line, "expected `discount <beta>`"));
                    };
                    discount = Some(number(line, "discount", b)?);
                }
                "states" => {
                    for &s in rest {
                        if !state_set.insert(s.to_string()) {
                            return Err(Error::parse(line, format!("duplicate state `{s}`")));
                        }
                        states.push(s.to_string());
                    }
                }
                "initial" => {
                    if initial.is_some() {
                        return Err(Error::parse(line, "initial given twice"));
                    }
                    let [s] = rest else {
                        return Err(Error::parse(line, "expected `initial <state>`"));
                    };
                    if !state_set.contains(*s) {
                        return Err(Error::parse(line, format!("unknown state `{s}`")));
                    }
                    initial = Some(s.to_string());
                }
                "targets" => {
                    if targets.is_some() {
                        return Err(Error::parse(line, "targets given twice"));
                    }
                    let mut t: Vec<String> = Vec::new();
                    for &s in rest {
                        if !state_set.contains(s) {
                            return Err(Error::parse(line, format!("unknown state `{s}`")));
                        }
                        if t.iter().any(|x| x == s) {
                            return Err(Error::parse(line, format!("duplicate target `{s}`")));
                        }
                        t.push(s.to_string());
                    }
                    targets = Some(t);
                }
                "actions" => {
                    let Some((&s, acts)) = rest.split_first() else {
                        return Err(Error::parse(line, "expected `actions <state> <action>...`"));
                    };
                    if !state_set.contains(s) {
                        return Err(Error::parse(line, format!("unknown state `{s}`")));
                    }
                    if action_sets.contains_key(s) {
                        return Err(Error::parse(line, format!("actions of `{s}` given twice")));
                    }
                    if acts.is_empty() {
                        return Err(Error::parse(line, format!("state `{s}` needs at least one action")));
                    }
                    let mut set = HashSet::new();
                    for &a in acts {
                        if !set.insert(a.to_string()) {
                            return Err(Error::parse(line, format!("duplicate action `{a}` in `{s}`")));
                        }
                    }
                    action_sets.insert(s.to_string(), set);
                    actions.push((s.to_string(), acts.iter().map(|a| a.to_string()).collect()));
                }
                "trans" => {
                    let [s, a, t, p] = rest else {
                        return Err(Error::parse(line, "expected `trans <state> <action> <succ> <prob>`"));
                    };
                    if !state_set.contains(*s) {
                        return Err(Error::parse(line, format!("unknown state `{s}`")));
                    }
                    known_pair(&action_sets, line, s, a)?;
                    if !state_set.contains(*t) {
                        return Err(Error::parse(line, format!("unknown successor `{t}`")));
                    }
                    if !seen_trans.insert((s.to_string(), a.to_string(), t.to_string())) {
                        return Err(Error::parse(line, format!("duplicate transition {s} {a} {t}")));
                    }
                    transitions.push(Transition {
                        state: s.to_string(),
                        action: a.to_string(),
                        succ: t.to_string(),
                        prob: number(line, "probability", p)?,
                    });
                }
                "cost" => {
                    let [s, a, c] = rest else {
                        return Err(Error::parse(line, "expected `cost <state> <action> <cost>`"));
                    };
                    if !state_set.contains(*s) {
                        return Err(Error::parse(line, format!("unknown state `{s}`")));
                    }
                    known_pair(&action_sets, line, s, a)?;
                    if !seen_cost.insert((s.to_string(), a.to_string())) {
                        return Err(Error::parse(line, format!("duplicate cost for {s} {a}")));
                    }
                    costs.push(CostEntry {
                        state: s.to_string(),
                        action: a.to_string(),
                        cost: number(line, "cost", c)?,
                    });
                }
                other => return Err(Error::parse(line, format!("unknown keyword `{other}`"))),
            }
        }
        let end = lines.line_count() + 1;
        if states.is_empty() {
            return Err(Error::parse(end, "no states declared"));
        }
        Ok(MdpDocument {
            version,
            discount: discount.ok_or_else(|| Error::parse(end, "missing `discount`"))?,
            states,
            initial: initial.ok_or_else(|| Error::parse(end, "missing `initial`"))?,
            targets: targets.unwrap_or_default(),
            actions,
            transitions,
            costs,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MDP_HEADER} {}", self.version);
        let _ = writeln!(out, "discount {}", self.discount);
        let _ = writeln!(out, "states {}", self.states.join(" "));
        let _ = writeln!(out, "initial {}", self.initial);
        if self.targets.is_empty() {
            out.push_str("targets\n");
        } else {
            let _ = writeln!(out, "targets {}", self.targets.join(" "));
        }
        for (s, acts) in &self.actions {
            let _ = writeln!(out, "actions {s} {}", acts.join(" "));
        }
        for t in &self.transitions {
            let _ = writeln!(out, "trans {} {} {} {}", t.state, t.action, t.succ, t.prob);
        }
        for c in &self.costs {
            let _ = writeln!(out, "cost {} {} {}", c.state, c.action, c.cost);
        }
        out
    }

    /// Builds and validates the MDP.
    pub fn to_mdp(&self) -> Result<Mdp> {
        let mut b = MdpBuilder::new(self.discount);
        let ids: HashMap<&str, usize> = self
            .states
            .iter()
            .map(|s| (s.as_str(), b.add_state(s.clone())))
            .collect();
        let mut succ: HashMap<(&str, &str), Vec<(usize, f64)>> = HashMap::new();
        for t in &self.transitions {
            succ.entry((&t.state, &t.action))
                .or_default()
                .push((ids[t.succ.as_str()], t.prob));
        }
        let cost: HashMap<(&str, &str), f64> = self
            .costs
            .iter()
            .map(|c| ((c.state.as_str(), c.action.as_str()), c.cost))
            .collect();
        for (s, acts) in &self.actions {
            for a in acts {
                let key = (s.as_str(), a.as_str());
                b.add_action(
                    ids[s.as_str()],
                    a.clone(),
                    succ.get(&key).map_or(&[][..], |v| v),
                    cost.get(&key).copied().unwrap_or(0.0),
                );
            }
        }
        b.initial(ids[self.initial.as_str()]);
        for t in &self.targets {
            b.target(ids[t.as_str()]);
        }
        b.build()
    }

    pub fn from_mdp(mdp: &Mdp) -> MdpDocument {
        let n = mdp.num_states();
        let name = |s: usize| mdp.state_name(s).to_string();
        let mut transitions = Vec::new();
        let mut costs = Vec::new();
        for s in 0..n {
            for (a, act) in mdp.actions(s).iter().enumerate() {
                for &(t, p) in mdp.transitions(s, a) {
                    transitions.push(Transition {
                        state: name(s),
                        action: act.clone(),
                        succ: name(t),
                        prob: p,
                    });
                }
                if mdp.cost(s, a) != 0.0 {
                    costs.push(CostEntry {
                        state: name(s),
                        action: act.clone(),
                        cost: mdp.cost(s, a),
                    });
                }
            }
        }
        MdpDocument {
            version: MDP_VERSION,
            discount: mdp.discount(),
            states: mdp.state_names().to_vec(),
            initial: name(mdp.initial()),
            targets: mdp.targets().iter().map(|&t| name(t)).collect(),
            actions: (0..n).map(|s| (name(s), mdp.actions(s).to_vec())).collect(),
            transitions,
            costs,
        }
    }
}

/// Parses and validates an MDP document.
pub fn parse_mdp(text: &str) -> Result<Mdp> {
    MdpDocument::parse(text)?.to_mdp()
}

pub fn write_mdp(mdp: &Mdp) -> String {
    MdpDocument::from_mdp(mdp).to_text()
}
