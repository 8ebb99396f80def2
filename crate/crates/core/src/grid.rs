//! Risk-annotated grid worlds.
//!
//! Coordinates are `(x, y)` with `x` the column and `y = 0` the bottom row.
//! Each free cell is a state named `c{x}_{y}`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::mdp::{Mdp, MdpBuilder};
use crate::policy::StationaryPolicy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Risk {
    High,
    Moderate,
    Low,
}

impl Risk {
    pub fn cost(self) -> f64 {
        match self {
            Risk::High => 4.0,
            Risk::Moderate => 2.0,
            Risk::Low => 1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Risk::High => 'H',
            Risk::Moderate => 'M',
            Risk::Low => 'L',
        }
    }

    pub fn from_symbol(c: &str) -> Option<Risk> {
        match c {
            "H" => Some(Risk::High),
            "M" => Some(Risk::Moderate),
            "L" => Some(Risk::Low),
            _ => None,
        }
    }
}

pub const MOVES: [(&str, i64, i64); 5] = [
    ("up", 0, 1),
    ("down", 0, -1),
    ("left", -1, 0),
    ("right", 1, 0),
    ("stay", 0, 0),
];

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub obstacles: BTreeSet<(usize, usize)>,
    pub target: (usize, usize),
    pub initial: (usize, usize),
    /// Row-major from the bottom: `risk[y * width + x]`. Entries under
    /// obstacles are ignored and written back as low.
    pub risk: Vec<Risk>,
    /// Probability that a move succeeds; otherwise the agent stays put.
    pub slip: f64,
    pub discount: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::new(10, 10)
    }
}

impl GridSpec {
    /// All-low-risk grid from the bottom-left to the top-right corner.
    pub fn new(width: usize, height: usize) -> GridSpec {
        GridSpec {
            width,
            height,
            obstacles: BTreeSet::new(),
            target: (width.saturating_sub(1), height.saturating_sub(1)),
            initial: (0, 0),
            risk: vec![Risk::Low; width * height],
            slip: 0.9,
            discount: 0.9,
        }
    }

    pub fn risk_at(&self, x: usize, y: usize) -> Risk {
        self.risk[y * self.width + x]
    }

    pub fn set_risk(&mut self, x: usize, y: usize, r: Risk) {
        self.risk[y * self.width + x] = r;
    }

    pub fn is_free(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && !self.obstacles.contains(&(x, y))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGrid(m));
        if self.width == 0 || self.height == 0 {
            return bad(format!("empty grid {}x{}", self.width, self.height));
        }
        if self.risk.len() != self.width * self.height {
            return bad(format!("risk map has {} cells, grid has {}", self.risk.len(), self.width * self.height));
        }
        for &(x, y) in &self.obstacles {
            if x >= self.width || y >= self.height {
                return bad(format!("obstacle ({x}, {y}) outside the grid"));
            }
        }
        for (what, (x, y)) in [("initial", self.initial), ("target", self.target)] {
            if !self.is_free(x, y) {
                return bad(format!("{what} cell ({x}, {y}) is off-grid or an obstacle"));
            }
        }
        if !(self.slip > 0.0 && self.slip <= 1.0) {
            return bad(format!("move success probability {} outside (0, 1]", self.slip));
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return bad(format!("discount {} outside (0, 1)", self.discount));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GridWorld {
    pub spec: GridSpec,
    pub mdp: Mdp,
    /// Cell of each state.
    pub cells: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct RiskCounts {
    pub high: usize,
    pub moderate: usize,
    pub low: usize,
}

pub fn generate_grid(spec: &GridSpec) -> Result<GridWorld> {
    spec.validate()?;
    let mut b = MdpBuilder::new(spec.discount);
    let mut cells = Vec::new();
    let mut id = vec![None; spec.width * spec.height];
    for y in 0..spec.height {
        for x in 0..spec.width {
            if spec.is_free(x, y) {
                id[y * spec.width + x] = Some(b.add_state(format!("c{x}_{y}")));
                cells.push((x, y));
            }
        }
    }
    let at = |x: usize, y: usize| id[y * spec.width + x].expect("free cell");
    for (s, &(x, y)) in cells.iter().enumerate() {
        if (x, y) == spec.target {
            b.add_action(s, "stay", &[(s, 1.0)], 0.0);
            b.target(s);
            continue;
        }
        let cost = spec.risk_at(x, y).cost();
        for (name, dx, dy) in MOVES {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            let dest = (nx >= 0 && ny >= 0 && spec.is_free(nx as usize, ny as usize))
                .then(|| at(nx as usize, ny as usize))
                .filter(|&t| t != s);
            match dest {
                Some(t) if spec.slip < 1.0 => {
                    b.add_action(s, name, &[(t, spec.slip), (s, 1.0 - spec.slip)], cost)
                }
                Some(t) => b.add_action(s, name, &[(t, 1.0)], cost),
                None => b.add_action(s, name, &[(s, 1.0)], cost),
            };
        }
    }
    b.initial(at(spec.initial.0, spec.initial.1));
    Ok(GridWorld {
        spec: spec.clone(),
        mdp: b.build()?,
        cells,
    })
}

impl GridWorld {
    pub fn state_at(&self, x: usize, y: usize) -> Option<usize> {
        self.mdp.state_id(&format!("c{x}_{y}"))
    }

    /// Risk class of a state; `None` for the target.
    pub fn risk_of(&self, s: usize) -> Option<Risk> {
        let (x, y) = self.cells[s];
        ((x, y) != self.spec.target).then(|| self.spec.risk_at(x, y))
    }

    /// Visits per risk class along a state sequence.
    pub fn count_risks(&self, path: &[usize]) -> RiskCounts {
        let mut c = RiskCounts::default();
        for &s in path {
            match self.risk_of(s) {
                Some(Risk::High) => c.high += 1,
                Some(Risk::Moderate) => c.moderate += 1,
                Some(Risk::Low) => c.low += 1,
                None => {}
            }
        }
        c
    }

    /// Text picture with the path marked by `*`, top row first.
    pub fn render(&self, path: &[usize]) -> String {
        let on_path: BTreeSet<(usize, usize)> = path.iter().map(|&s| self.cells[s]).collect();
        let mut out = String::new();
        for y in (0..self.spec.height).rev() {
            for x in 0..self.spec.width {
                let ch = if self.spec.obstacles.contains(&(x, y)) {
                    'X'
                } else if (x, y) == self.spec.target {
                    'T'
                } else if on_path.contains(&(x, y)) {
                    '*'
                } else {
                    self.spec.risk_at(x, y).symbol()
                };
                out.push(ch);
                if x + 1 < self.spec.width {
                    out.push(' ');
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Follows the most probable successor from the initial state until a
/// target, a repeated state or `max_len` states. Ties go to the lowest
/// index.
pub fn most_likely_trajectory(mdp: &Mdp, pol: &StationaryPolicy, max_len: usize) -> Vec<usize> {
    let mut path = vec![mdp.initial()];
    let mut seen = vec![false; mdp.num_states()];
    seen[mdp.initial()] = true;
    let mut s = mdp.initial();
    while !mdp.is_target(s) && path.len() < max_len {
        let mut mass = vec![0.0; mdp.num_states()];
        for (a, &pa) in pol.row(s).iter().enumerate() {
            for &(t, p) in mdp.transitions(s, a) {
                mass[t] += pa * p;
            }
        }
        let mut next = 0;
        for t in 1..mass.len() {
            if mass[t] > mass[next] {
                next = t;
            }
        }
        if seen[next] {
            break;
        }
        seen[next] = true;
        path.push(next);
        s = next;
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reach::max_reach;

    #[test]
    fn one_by_two() {
        let mut spec = GridSpec::new(2, 1);
        spec.target = (1, 0);
        let g = generate_grid(&spec).unwrap();
        assert_eq!(g.mdp.num_states(), 2);
        assert_eq!(g.mdp.targets(), [1]);
        let right = g.mdp.action_id(0, "right").unwrap();
        let row = g.mdp.transitions(0, right);
        assert_eq!(row[1], (1, 0.9));
        assert!((row[0].1 - 0.1).abs() < 1e-15);
        let up = g.mdp.action_id(0, "up").unwrap();
        assert_eq!(g.mdp.transitions(0, up), [(0, 1.0)]);
    }

    #[test]
    fn center_obstacle() {
        let mut spec = GridSpec::new(3, 3);
        spec.obstacles.insert((1, 1));
        let g = generate_grid(&spec).unwrap();
        assert_eq!(g.mdp.num_states(), 8);
        assert!(g.state_at(1, 1).is_none());
        let ra = max_reach(&g.mdp).unwrap();
        // Independent check: value iteration on the reach probabilities.
        let mut v = vec![0.0; 8];
        for _ in 0..2000 {
            v = (0..8)
                .map(|s| {
                    if g.mdp.is_target(s) {
                        return 1.0;
                    }
                    (0..g.mdp.num_actions(s))
                        .map(|a| g.mdp.transitions(s, a).iter().map(|&(t, p)| p * v[t]).sum::<f64>())
                        .fold(0.0, f64::max)
                })
                .collect();
        }
        for s in 0..8 {
            assert!((v[s] - 1.0).abs() < 1e-9);
            assert!((ra.x[s] - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn state_based_costs() {
        let mut spec = GridSpec::new(2, 2);
        spec.set_risk(0, 0, Risk::High);
        let g = generate_grid(&spec).unwrap();
        let s = g.state_at(0, 0).unwrap();
        assert!(g.mdp.costs()[s].iter().all(|&c| c == 4.0));
        let t = g.state_at(1, 1).unwrap();
        assert_eq!(g.mdp.costs()[t], [0.0]);
    }

    #[test]
    fn invalid_specs() {
        let mut spec = GridSpec::new(3, 3);
        spec.obstacles.insert((0, 0));
        assert!(generate_grid(&spec).is_err());
        let mut spec = GridSpec::new(3, 3);
        spec.target = (5, 5);
        assert!(generate_grid(&spec).is_err());
        let mut spec = GridSpec::new(3, 3);
        spec.slip = 0.0;
        assert!(generate_grid(&spec).is_err());
    }

    #[test]
    fn trajectory_follows_moves() {
        let spec = GridSpec::new(3, 1);
        let g = generate_grid(&spec).unwrap();
        let right: Vec<usize> = (0..3).map(|s| g.mdp.action_id(s, "right").unwrap_or(0)).collect();
        let pol = StationaryPolicy::deterministic(&g.mdp, &right);
        assert_eq!(most_likely_trajectory(&g.mdp, &pol, 100), [0, 1, 2]);
        let stay = StationaryPolicy::deterministic(&g.mdp, &[4, 4, 0]);
        assert_eq!(most_likely_trajectory(&g.mdp, &stay, 100), [0]);
    }
}
