use nalgebra::{DMatrix, DVector};

use crate::model::{LinearProgram, LpError, Relation, Sense};
use crate::PIVOT_TOL;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration cap reached or the final basis could not be factorized.
    NumericalFailure,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    pub pivot_tol: f64,
    /// Phase-one residual above which the program is declared infeasible
    /// (scaled by `max(1, |b|_inf)`).
    pub feasibility_tol: f64,
    /// Dantzig pricing is used for `bland_factor * (rows + cols)` pivots,
    /// Bland's rule afterwards.
    pub bland_factor: usize,
    pub max_iterations: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            pivot_tol: PIVOT_TOL,
            feasibility_tol: 1e-7,
            bland_factor: 5,
            max_iterations: None,
        }
    }
}

/// Result of [`solve_lp`].
///
/// `duals` has one entry per user row and is signed so that, for programs
/// whose variables carry only the default bounds, `sum(rhs_i * duals_i)`
/// equals `objective` at optimality.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    fn empty(status: LpStatus, n: usize, m: usize, iterations: usize) -> Self {
        Self {
            status,
            x: vec![0.0; n],
            objective: f64::NAN,
            duals: vec![0.0; m],
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    lp.check()?;
    let n = lp.num_vars();
    let m = lp.num_rows();
    let std = match Standard::build(lp) {
        Some(std) => std,
        None => return Ok(LpSolution::empty(LpStatus::Infeasible, n, m, 0)),
    };
    let mut tab = Tableau::new(&std, opts);
    let status = tab.run();
    if status != LpStatus::Optimal {
        return Ok(LpSolution::empty(status, n, m, tab.iterations));
    }
    let (col_values, row_duals) = tab.finish();

    let x = std.recover(&col_values);
    let objective = lp.evaluate(&x);
    let dir = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let duals = (0..m)
        .map(|i| row_duals[i] * std.row_sign[i] * dir)
        .collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        duals,
        iterations: tab.iterations,
    })
}

/// How a user variable maps onto the nonnegative standard-form columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    Fixed(f64),
    /// `x = offset + sign * col`
    Shift { col: usize, offset: f64, sign: f64 },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

/// `min c^T z  s.t.  A z (rel) b, z >= 0, b >= 0`.
struct Standard {
    maps: Vec<VarMap>,
    ncols: usize,
    cost: Vec<f64>,
    a: Vec<Vec<f64>>,
    rel: Vec<Relation>,
    b: Vec<f64>,
    /// +1 or -1 per user row (rows with negative rhs are negated).
    row_sign: Vec<f64>,
}

impl Standard {
    fn build(lp: &LinearProgram) -> Option<Self> {
        let dir = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut maps = Vec::with_capacity(lp.num_vars());
        let mut ncols = 0;
        let mut cost = Vec::new();
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for j in 0..lp.num_vars() {
            let (lo, hi) = (lp.lower[j], lp.upper[j]);
            let c = lp.objective[j] * dir;
            if lo > hi {
                return None;
            }
            if lo == hi {
                maps.push(VarMap::Fixed(lo));
            } else if lo.is_finite() {
                maps.push(VarMap::Shift {
                    col: ncols,
                    offset: lo,
                    sign: 1.0,
                });
                cost.push(c);
                if hi.is_finite() {
                    bound_rows.push((ncols, hi - lo));
                }
                ncols += 1;
            } else if hi.is_finite() {
                maps.push(VarMap::Shift {
                    col: ncols,
                    offset: hi,
                    sign: -1.0,
                });
                cost.push(-c);
                ncols += 1;
            } else {
                maps.push(VarMap::Split {
                    pos: ncols,
                    neg: ncols + 1,
                });
                cost.push(c);
                cost.push(-c);
                ncols += 2;
            }
        }

        let m = lp.num_rows() + bound_rows.len();
        let mut a = Vec::with_capacity(m);
        let mut rel = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        let mut row_sign = Vec::with_capacity(lp.num_rows());
        for row in &lp.rows {
            let mut dense = vec![0.0; ncols];
            let mut rhs = row.rhs;
            for &(j, coef) in &row.coeffs {
                match maps[j] {
                    VarMap::Fixed(v) => rhs -= coef * v,
                    VarMap::Shift { col, offset, sign } => {
                        rhs -= coef * offset;
                        dense[col] += coef * sign;
                    }
                    VarMap::Split { pos, neg } => {
                        dense[pos] += coef;
                        dense[neg] -= coef;
                    }
                }
            }
            let mut r = row.relation;
            let mut sign = 1.0;
            if rhs < 0.0 {
                sign = -1.0;
                rhs = -rhs;
                dense.iter_mut().for_each(|v| *v = -*v);
                r = match r {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            a.push(dense);
            rel.push(r);
            b.push(rhs);
            row_sign.push(sign);
        }
        for (col, cap) in bound_rows {
            let mut dense = vec![0.0; ncols];
            dense[col] = 1.0;
            a.push(dense);
            rel.push(Relation::Le);
            b.push(cap);
        }
        Some(Self {
            maps,
            ncols,
            cost,
            a,
            rel,
            b,
            row_sign,
        })
    }

    fn recover(&self, cols: &[f64]) -> Vec<f64> {
        self.maps
            .iter()
            .map(|m| match *m {
                VarMap::Fixed(v) => v,
                VarMap::Shift { col, offset, sign } => offset + sign * cols[col],
                VarMap::Split { pos, neg } => cols[pos] - cols[neg],
            })
            .collect()
    }
}

struct Tableau<'a> {
    std: &'a Standard,
    opts: SimplexOptions,
    m: usize,
    /// structural + slack + artificial
    width: usize,
    art_start: usize,
    /// Full standard-form constraint matrix, kept for the final refinement.
    full: Vec<Vec<f64>>,
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    d: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
    bland_after: usize,
}

impl<'a> Tableau<'a> {
    fn new(std: &'a Standard, opts: &SimplexOptions) -> Self {
        let m = std.a.len();
        let nslack = std.rel.iter().filter(|r| **r != Relation::Eq).count();
        let nart = std.rel.iter().filter(|r| **r != Relation::Le).count();
        let art_start = std.ncols + nslack;
        let width = art_start + nart;
        let mut full = vec![vec![0.0; width]; m];
        let mut basis = vec![0; m];
        let (mut s, mut art) = (std.ncols, art_start);
        for i in 0..m {
            full[i][..std.ncols].copy_from_slice(&std.a[i]);
            match std.rel[i] {
                Relation::Le => {
                    full[i][s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    full[i][s] = -1.0;
                    s += 1;
                    full[i][art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    full[i][art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        let t = full
            .iter()
            .zip(&std.b)
            .map(|(row, &b)| {
                let mut r = row.clone();
                r.push(b);
                r
            })
            .collect();
        let max_iterations = opts
            .max_iterations
            .unwrap_or(20_000 + 50 * (m + width));
        Self {
            std,
            opts: *opts,
            m,
            width,
            art_start,
            full,
            t,
            basis,
            d: vec![0.0; width + 1],
            iterations: 0,
            max_iterations,
            bland_after: opts.bland_factor * (m + width),
        }
    }

    fn phase_cost(&self, phase_one: bool) -> Vec<f64> {
        let mut c = vec![0.0; self.width];
        if phase_one {
            c[self.art_start..].iter_mut().for_each(|v| *v = 1.0);
        } else {
            c[..self.std.ncols].copy_from_slice(&self.std.cost);
        }
        c
    }

    fn price(&mut self, cost: &[f64]) {
        let w = self.width;
        self.d[..w].copy_from_slice(cost);
        self.d[w] = 0.0;
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, tij) in self.d.iter_mut().zip(&self.t[i]) {
                    *dj -= cb * tij;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        self.t[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pr) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                row[c] = 0.0;
            }
        }
        let f = self.d[c];
        if f != 0.0 {
            for (v, pr) in self.d.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.d[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations over columns `< limit`.
    fn iterate(&mut self, limit: usize) -> LpStatus {
        let tol = self.opts.pivot_tol;
        let rhs = self.width;
        loop {
            if self.iterations >= self.max_iterations {
                return LpStatus::NumericalFailure;
            }
            let bland = self.iterations >= self.bland_after;
            let mut enter = None;
            let mut best = -tol;
            for j in 0..limit {
                if self.d[j] < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = self.d[j];
                }
            }
            let Some(c) = enter else {
                return LpStatus::Optimal;
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.t[i][c];
                if a > tol {
                    let ratio = self.t[i][rhs].max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best_ratio)) => {
                            let slack = 1e-12 * (1.0 + best_ratio.abs());
                            if ratio < best_ratio - slack {
                                Some((i, ratio))
                            } else if ratio <= best_ratio + slack {
                                let better = if bland {
                                    self.basis[i] < self.basis[k]
                                } else {
                                    a > self.t[k][c]
                                };
                                if better {
                                    Some((i, ratio))
                                } else {
                                    Some((k, best_ratio))
                                }
                            } else {
                                Some((k, best_ratio))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return LpStatus::Unbounded;
            };
            self.pivot(r, c);
            self.iterations += 1;
        }
    }

    fn run(&mut self) -> LpStatus {
        let rhs = self.width;
        if self.art_start < self.width {
            let c1 = self.phase_cost(true);
            self.price(&c1);
            match self.iterate(self.width) {
                LpStatus::Optimal => {}
                // Phase one is bounded below by zero.
                LpStatus::Unbounded => return LpStatus::NumericalFailure,
                other => return other,
            }
            let scale = self.std.b.iter().fold(1.0_f64, |a, b| a.max(b.abs()));
            if -self.d[rhs] > self.opts.feasibility_tol * scale {
                return LpStatus::Infeasible;
            }
            // Drive zero-valued artificials out of the basis where possible;
            // rows where this fails are redundant.
            for i in 0..self.m {
                if self.basis[i] >= self.art_start {
                    let col = (0..self.art_start)
                        .filter(|&j| self.t[i][j].abs() > self.opts.pivot_tol)
                        .max_by(|&a, &b| self.t[i][a].abs().total_cmp(&self.t[i][b].abs()));
                    if let Some(j) = col {
                        self.pivot(i, j);
                    }
                }
            }
        }
        let c2 = self.phase_cost(false);
        self.price(&c2);
        self.iterate(self.art_start)
    }

    /// Column values and standard-row duals from the final basis, refined by
    /// a direct solve against the original constraint matrix.
    fn finish(&self) -> (Vec<f64>, Vec<f64>) {
        let rhs = self.width;
        let mut cols = vec![0.0; self.width];
        for i in 0..self.m {
            cols[self.basis[i]] = self.t[i][rhs];
        }
        let cost = self.phase_cost(false);
        let mut duals = vec![0.0; self.m];
        if self.m > 0 {
            let bmat = DMatrix::from_fn(self.m, self.m, |i, k| self.full[i][self.basis[k]]);
            let lu = bmat.clone().lu();
            let b = DVector::from_column_slice(&self.std.b);
            if let Some(xb) = lu.solve(&b) {
                let drift = (0..self.m)
                    .map(|i| (xb[i] - self.t[i][rhs]).abs())
                    .fold(0.0, f64::max);
                if drift < 1e-6 {
                    for i in 0..self.m {
                        let v = xb[i];
                        cols[self.basis[i]] = if v < 0.0 && v > -1e-9 { 0.0 } else { v };
                    }
                }
            }
            let cb = DVector::from_iterator(self.m, self.basis.iter().map(|&j| cost[j]));
            if let Some(y) = bmat.transpose().lu().solve(&cb) {
                duals.copy_from_slice(y.as_slice());
            } else {
                // Fall back to reading duals off the tableau.
                for (i, dual) in duals.iter_mut().enumerate() {
                    let col = self.unit_column(i);
                    *dual = cost[col] - self.d[col];
                }
            }
        }
        (cols[..self.std.ncols].to_vec(), duals)
    }

    /// Index of the column that started as the unit vector for row `i`.
    fn unit_column(&self, i: usize) -> usize {
        (self.std.ncols..self.width)
            .find(|&j| self.full[i][j] == 1.0)
            .unwrap_or(self.std.ncols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn max_single_var() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 1.0);
        lp.add_row("c", vec![(x, 1.0)], Relation::Le, 3.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(close(s.x[0], 3.0));
        assert!(close(s.objective, 3.0));
        assert!(close(s.duals[0], 1.0));
    }

    #[test]
    fn min_with_ge_row() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", 1.0);
        let y = lp.add_var("y", 1.0);
        lp.add_row("sum", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 2.0);
        lp.add_row("xcap", vec![(x, 1.0)], Relation::Le, 0.5);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(close(s.objective, 2.0));
        assert!(lp.max_violation(&s.x) < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", 1.0);
        lp.add_row("a", vec![(x, 1.0)], Relation::Ge, 2.0);
        lp.add_row("b", vec![(x, 1.0)], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 1.0);
        let y = lp.add_var("y", 0.0);
        lp.add_row("a", vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn bounds_shift_and_free_vars() {
        // min x - y, x in [1, 4], y free with y <= 2 via row, x + y >= 0
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var_bounded("x", 1.0, 1.0, 4.0);
        let y = lp.add_var_bounded("y", -1.0, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row("ycap", vec![(y, 1.0)], Relation::Le, 2.0);
        lp.add_row("sum", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 0.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(close(s.x[0], 1.0) && close(s.x[1], 2.0), "{:?}", s.x);
        assert!(close(s.objective, -1.0));
    }

    #[test]
    fn fixed_and_upper_only_vars() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var_bounded("x", 2.0, 3.0, 3.0);
        let y = lp.add_var_bounded("y", 1.0, f64::NEG_INFINITY, 5.0);
        lp.add_row("r", vec![(x, 1.0), (y, 1.0)], Relation::Le, 6.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(close(s.x[0], 3.0) && close(s.x[1], 3.0));
        assert!(close(s.objective, 9.0));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", 1.0);
        let y = lp.add_var("y", 2.0);
        lp.add_row("a", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 1.0);
        lp.add_row("b", vec![(x, 2.0), (y, 2.0)], Relation::Eq, 2.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(close(s.objective, 1.0));
    }

    #[test]
    fn negative_rhs_row() {
        // -x <= -2  <=>  x >= 2
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", 3.0);
        lp.add_row("r", vec![(x, -1.0)], Relation::Le, -2.0);
        let s = solve_lp(&lp).unwrap();
        assert!(close(s.x[0], 2.0));
        assert!(close(s.duals[0] * -2.0, s.objective));
    }

    #[test]
    fn empty_program() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_var("x", 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn malformed_program_is_an_error() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_var("x", 1.0);
        lp.add_row("bad", vec![(3, 1.0)], Relation::Le, 1.0);
        assert!(matches!(
            solve_lp(&lp),
            Err(LpError::UndeclaredVariable { .. })
        ));
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", f64::NAN);
        lp.add_row("r", vec![(x, 1.0)], Relation::Le, 1.0);
        assert!(matches!(solve_lp(&lp), Err(LpError::NonFinite { .. })));
    }

    #[test]
    fn iteration_cap_reports_status() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 1.0);
        let y = lp.add_var("y", 1.0);
        lp.add_row("a", vec![(x, 1.0), (y, 2.0)], Relation::Le, 4.0);
        lp.add_row("b", vec![(x, 3.0), (y, 1.0)], Relation::Le, 6.0);
        let opts = SimplexOptions {
            max_iterations: Some(0),
            ..Default::default()
        };
        let s = solve_lp_with(&lp, &opts).unwrap();
        assert_eq!(s.status, LpStatus::NumericalFailure);
    }
}
