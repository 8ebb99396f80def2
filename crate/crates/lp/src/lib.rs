//! Small, dependency-light linear and mixed-binary programming.
//!
//! The solver is a dense two-phase tableau simplex with Dantzig pricing that
//! falls back to Bland's rule after `5 * (rows + cols)` pivots, and a
//! depth-first branch-and-bound for programs with `{0, 1}` variables. It is
//! sized for problems with up to a few thousand columns and makes no attempt
//! to compete with industrial solvers; the priority is deterministic,
//! reproducible output.
//!
//! ```
//! use reachsynth_lp::{LinearProgram, Relation, Sense, solve_lp, LpStatus};
//!
//! let mut lp = LinearProgram::new(Sense::Maximize);
//! let x = lp.add_var("x", 1.0);
//! lp.add_row("cap", vec![(x, 1.0)], Relation::Le, 3.0);
//! let sol = solve_lp(&lp).unwrap();
//! assert_eq!(sol.status, LpStatus::Optimal);
//! assert!((sol.objective - 3.0).abs() < 1e-9);
//! ```

mod dump;
mod milp;
mod model;
mod simplex;

pub use milp::{solve_milp, MilpOptions, MilpSolution, MilpStatus, NodeStats};
pub use model::{LinearProgram, LpError, MixedIntegerProgram, Relation, Row, Sense};
pub use simplex::{solve_lp, solve_lp_with, LpSolution, LpStatus, SimplexOptions};

/// Pivot element tolerance.
pub const PIVOT_TOL: f64 = 1e-9;
