//! Numerical tolerances shared across the crate.
//!
//! Solver-facing comparisons use the tight values; anything printed in a
//! report or compared across independently computed quantities uses
//! [`REPORT`].

/// Row sums of transition kernels and policies.
pub const ROW_SUM: f64 = 1e-9;
/// Membership in the reach-maximizing action set.
pub const AMAX: f64 = 1e-7;
/// Membership in the cost-optimal action set.
pub const AOPT: f64 = 1e-7;
/// User-facing equality of probabilities and costs.
pub const REPORT: f64 = 1e-6;
/// Occupation measure mass that counts as support.
pub const SUPPORT: f64 = 1e-9;
/// Sup-norm accuracy target of value iteration.
pub const VALUE_ITERATION: f64 = 1e-10;
