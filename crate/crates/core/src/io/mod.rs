//! Text formats: MDP documents, policy files and grid layouts.

mod layout;
mod mdp_format;
mod policy_format;

pub use layout::{parse_layout, write_layout};
pub use mdp_format::{parse_mdp, write_mdp, CostEntry, MdpDocument, Transition};
pub use policy_format::{parse_policy, write_policy};

use crate::error::{Error, Result};

/// Non-blank, comment-stripped lines with 1-based numbers.
pub(crate) struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    pub(crate) fn next_line(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = body.split_whitespace().collect();
            if !toks.is_empty() {
                return Some((i + 1, toks));
            }
        }
        None
    }

    /// Number of lines consumed so far.
    pub(crate) fn line_count(&self) -> usize {
        self.last
    }

    pub(crate) fn header(&mut self, name: &str, version: u32) -> Result<u32> {
        let Some((line, toks)) = self.next_line() else {
            return Err(Error::parse(1, format!("empty input, expected `{name} {version}`")));
        };
        match toks.as_slice() {
            [n, v] if *n == name => match v.parse::<u32>() {
                Ok(found) if found == version => Ok(found),
                _ => Err(Error::parse(line, format!("unsupported {name} version `{v}`"))),
            },
            _ => Err(Error::parse(line, format!("expected header `{name} {version}`"))),
        }
    }
}
