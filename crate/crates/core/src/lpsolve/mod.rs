//! Self-contained deterministic sparse LP solver (two-phase primal
//! simplex) for minimization problems with nonnegative variables.
//! Generic: knows nothing about routing.

mod mps;
mod simplex;

pub use mps::write_mps;

use thiserror::Error;

/// Feasibility tolerance shared by the solver and its callers.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost (dual feasibility) tolerance.
pub const RC_TOL: f64 = 1e-7;
/// Relative duality-gap tolerance.
pub const GAP_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    /// Sparse (variable index, coefficient) pairs.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Minimization LP over nonnegative variables.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub n_vars: usize,
    /// Sparse objective (variable index, cost).
    pub objective: Vec<(usize, f64)>,
    pub rows: Vec<LpRow>,
    /// Diagnostic names, one per variable; may be empty.
    pub var_names: Vec<String>,
}

impl LpProblem {
    pub fn var_name(&self, j: usize) -> String {
        self.var_names.get(j).cloned().unwrap_or_else(|| format!("x{j}"))
    }

    pub fn dense_objective(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n_vars];
        for &(j, v) in &self.objective {
            c[j] += v;
        }
        c
    }

    fn check(&self) -> Result<(), LpError> {
        for &(j, v) in &self.objective {
            if j >= self.n_vars {
                return Err(LpError::BadProblem(format!("objective references variable {j}")));
            }
            if !v.is_finite() {
                return Err(LpError::BadProblem("non-finite objective coefficient".into()));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::BadProblem(format!("non-finite rhs in row {i}")));
            }
            for &(j, v) in &row.coeffs {
                if j >= self.n_vars {
                    return Err(LpError::BadProblem(format!("row {i} references variable {j}")));
                }
                if !v.is_finite() {
                    return Err(LpError::BadProblem(format!("non-finite coefficient in row {i}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// One value per problem variable (empty unless optimal).
    pub primal: Vec<f64>,
    pub objective_value: f64,
    /// One multiplier per constraint row (empty unless optimal).
    pub duals: Vec<f64>,
    pub iterations: usize,
    /// Anti-cycling diagnostic: degenerate pivots observed.
    pub degenerate_pivots: usize,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    BadProblem(String),
    #[error("iteration limit reached after {0} pivots")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Standard-form companion of a problem: every relation converted to an
/// equality by a named slack/surplus variable with zero cost, plus the
/// mapping back to the original variables.
#[derive(Debug, Clone)]
pub struct StandardForm {
    pub problem: LpProblem,
    pub n_original: usize,
    /// Slack/surplus column added for each row, if any.
    pub slack_of_row: Vec<Option<usize>>,
}

pub fn to_standard_form(problem: &LpProblem) -> StandardForm {
    let mut std_problem = problem.clone();
    if std_problem.var_names.len() < std_problem.n_vars {
        for j in std_problem.var_names.len()..std_problem.n_vars {
            std_problem.var_names.push(format!("x{j}"));
        }
    }
    let mut slack_of_row = Vec::with_capacity(problem.rows.len());
    for (i, row) in std_problem.rows.iter_mut().enumerate() {
        match row.relation {
            Relation::Eq => slack_of_row.push(None),
            Relation::Le => {
                let j = std_problem.n_vars;
                std_problem.n_vars += 1;
                std_problem.var_names.push(format!("slack_r{i}"));
                row.coeffs.push((j, 1.0));
                row.relation = Relation::Eq;
                slack_of_row.push(Some(j));
            }
            Relation::Ge => {
                let j = std_problem.n_vars;
                std_problem.n_vars += 1;
                std_problem.var_names.push(format!("surplus_r{i}"));
                row.coeffs.push((j, -1.0));
                row.relation = Relation::Eq;
                slack_of_row.push(Some(j));
            }
        }
    }
    StandardForm {
        problem: std_problem,
        n_original: problem.n_vars,
        slack_of_row,
    }
}

/// Solves a (not necessarily standard-form) problem with the two-phase
/// primal simplex. Dantzig pricing with an automatic switch to Bland's
/// rule after `3 * (rows + cols)` degenerate pivots; lowest-index
/// tie-breaking everywhere, so identical problems yield identical
/// iteration counts and solutions. Duals are taken from the final basis.
pub fn simplex_solve(problem: &LpProblem, tol: f64) -> Result<LpSolution, LpError> {
    problem.check()?;
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(LpError::BadProblem(format!("tol {tol} outside [1e-12, 1e-4]")));
    }
    let sf = to_standard_form(problem);
    let outcome = simplex::solve_standard(&sf.problem, tol)?;
    match outcome.status {
        LpStatus::Optimal => {
            let primal: Vec<f64> = outcome.x[..sf.n_original].to_vec();
            let c = problem.dense_objective();
            let objective_value = primal.iter().zip(&c).map(|(x, c)| x * c).sum();
            Ok(LpSolution {
                status: LpStatus::Optimal,
                primal,
                objective_value,
                duals: outcome.duals,
                iterations: outcome.iterations,
                degenerate_pivots: outcome.degenerate_pivots,
            })
        }
        status => Ok(LpSolution {
            status,
            primal: Vec::new(),
            objective_value: if status == LpStatus::Unbounded {
                f64::NEG_INFINITY
            } else {
                f64::NAN
            },
            duals: Vec::new(),
            iterations: outcome.iterations,
            degenerate_pivots: outcome.degenerate_pivots,
        }),
    }
}

/// Independent optimality certificate: primal feasibility, dual
/// feasibility (reduced costs) and complementary slackness, each checked
/// on the original problem.
#[derive(Debug, Clone)]
pub struct OptimalityReport {
    pub primal_feasible: bool,
    pub max_primal_violation: f64,
    pub dual_feasible: bool,
    pub min_reduced_cost: f64,
    pub complementary_slackness: bool,
    pub max_complementarity_violation: f64,
    pub duality_gap: f64,
    pub gap_ok: bool,
}

impl OptimalityReport {
    pub fn all_pass(&self) -> bool {
        self.primal_feasible && self.dual_feasible && self.complementary_slackness && self.gap_ok
    }
}

pub fn verify_optimality(problem: &LpProblem, solution: &LpSolution, tol: f64) -> OptimalityReport {
    assert_eq!(solution.status, LpStatus::Optimal, "verify requires an optimal solution");
    let x = &solution.primal;
    let y = &solution.duals;
    let c = problem.dense_objective();

    let mut max_primal = 0.0f64;
    for xj in x {
        max_primal = max_primal.max(-xj);
    }
    let mut max_comp = 0.0f64;
    let mut dual_obj = 0.0f64;
    let mut dual_ok = true;
    for (i, row) in problem.rows.iter().enumerate() {
        let ax: f64 = row.coeffs.iter().map(|&(j, v)| v * x[j]).sum();
        let scale = 1.0 + row.rhs.abs() + ax.abs();
        let resid = match row.relation {
            Relation::Eq => (ax - row.rhs).abs(),
            Relation::Le => (ax - row.rhs).max(0.0),
            Relation::Ge => (row.rhs - ax).max(0.0),
        };
        max_primal = max_primal.max(resid / scale);
        let yi = y[i];
        match row.relation {
            Relation::Le if yi > tol => dual_ok = false,
            Relation::Ge if yi < -tol => dual_ok = false,
            _ => {}
        }
        max_comp = max_comp.max((yi * (ax - row.rhs)).abs() / scale);
        dual_obj += yi * row.rhs;
    }

    // Reduced costs of the original variables.
    let mut rc = c;
    for (i, row) in problem.rows.iter().enumerate() {
        for &(j, v) in &row.coeffs {
            rc[j] -= y[i] * v;
        }
    }
    let mut min_rc = 0.0f64;
    for (j, &r) in rc.iter().enumerate() {
        min_rc = min_rc.min(r);
        max_comp = max_comp.max((x[j] * r).abs() / (1.0 + x[j].abs()));
    }

    let primal_obj = solution.objective_value;
    let gap = (primal_obj - dual_obj).abs();
    OptimalityReport {
        primal_feasible: max_primal <= tol,
        max_primal_violation: max_primal,
        dual_feasible: dual_ok && min_rc >= -tol,
        min_reduced_cost: min_rc,
        complementary_slackness: max_comp <= tol.max(1e-6),
        max_complementarity_violation: max_comp,
        duality_gap: gap,
        gap_ok: gap <= GAP_REL_TOL * (1.0 + primal_obj.abs()),
    }
}
