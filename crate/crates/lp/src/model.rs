use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// One constraint `sum(coeff * var) <relation> rhs`.
#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("row `{row}` references undeclared variable index {var}")]
    UndeclaredVariable { row: String, var: usize },
    #[error("non-finite coefficient in {location}")]
    NonFinite { location: String },
    #[error("variable index {0} marked binary but not declared")]
    UndeclaredBinary(usize),
}

/// A linear program over named continuous variables.
///
/// Variables default to bounds `[0, +inf)`. Rows are stored sparsely.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub(crate) sense: Sense,
    pub(crate) names: Vec<String>,
    pub(crate) objective: Vec<f64>,
    pub(crate) lower: Vec<f64>,
    pub(crate) upper: Vec<f64>,
    pub(crate) rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            names: Vec::new(),
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Adds a variable with bounds `[0, +inf)` and returns its index.
    pub fn add_var(&mut self, name: impl Into<String>, objective: f64) -> usize {
        self.add_var_bounded(name, objective, 0.0, f64::INFINITY)
    }

    pub fn add_var_bounded(
        &mut self,
        name: impl Into<String>,
        objective: f64,
        lower: f64,
        upper: f64,
    ) -> usize {
        self.names.push(name.into());
        self.objective.push(objective);
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.rows.push(Row {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    /// Mutable access to a row, e.g. to relax its right-hand side.
    pub fn row_mut(&mut self, row: usize) -> &mut Row {
        &mut self.rows[row]
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn var_name(&self, var: usize) -> &str {
        &self.names[var]
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    pub fn objective_coeff(&self, var: usize) -> f64 {
        self.objective[var]
    }

    /// Objective value of `x` under this program's objective.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Left-hand side of each row at `x`.
    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.coeffs.iter().map(|&(j, a)| a * x[j]).sum())
            .collect()
    }

    /// Largest bound or row violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for (row, act) in self.rows.iter().zip(self.row_activity(x)) {
            let viol = match row.relation {
                Relation::Le => act - row.rhs,
                Relation::Ge => row.rhs - act,
                Relation::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Structural checks: every row references declared variables and all
    /// numbers are finite (bounds may be infinite).
    pub fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        for (j, c) in self.objective.iter().enumerate() {
            if !c.is_finite() {
                return Err(LpError::NonFinite {
                    location: format!("objective coefficient of `{}`", self.names[j]),
                });
            }
            if self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(LpError::NonFinite {
                    location: format!("bounds of `{}`", self.names[j]),
                });
            }
        }
        for row in &self.rows {
            if !row.rhs.is_finite() {
                return Err(LpError::NonFinite {
                    location: format!("right-hand side of `{}`", row.name),
                });
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(LpError::UndeclaredVariable {
                        row: row.name.clone(),
                        var: j,
                    });
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite {
                        location: format!("row `{}`", row.name),
                    });
                }
            }
        }
        Ok(())
    }
}

/// A linear program in which some variables are restricted to `{0, 1}`.
#[derive(Clone, Debug)]
pub struct MixedIntegerProgram {
    pub lp: LinearProgram,
    pub(crate) binaries: Vec<usize>,
}

impl MixedIntegerProgram {
    pub fn new(lp: LinearProgram) -> Self {
        Self {
            lp,
            binaries: Vec::new(),
        }
    }

    /// Adds a `{0, 1}` variable.
    pub fn add_binary(&mut self, name: impl Into<String>, objective: f64) -> usize {
        let j = self.lp.add_var_bounded(name, objective, 0.0, 1.0);
        self.binaries.push(j);
        j
    }

    /// Marks an existing variable as binary and clamps its bounds to `[0, 1]`.
    pub fn mark_binary(&mut self, var: usize) {
        let (lo, hi) = self.lp.bounds(var);
        self.lp.set_bounds(var, lo.max(0.0), hi.min(1.0));
        if !self.binaries.contains(&var) {
            self.binaries.push(var);
        }
    }

    pub fn binaries(&self) -> &[usize] {
        &self.binaries
    }

    pub fn check(&self) -> Result<(), LpError> {
        self.lp.check()?;
        if let Some(&j) = self.binaries.iter().find(|&&j| j >= self.lp.num_vars()) {
            return Err(LpError::UndeclaredBinary(j));
        }
        Ok(())
    }
}
