//! Free-format MPS dump of an [`LpProblem`] for cross-checking against
//! external solvers.

use super::{LpProblem, Relation};

pub fn write_mps(problem: &LpProblem, name: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("NAME          {name}\n"));
    out.push_str("ROWS\n");
    out.push_str(" N  COST\n");
    for (i, row) in problem.rows.iter().enumerate() {
        let kind = match row.relation {
            Relation::Le => 'L',
            Relation::Ge => 'G',
            Relation::Eq => 'E',
        };
        out.push_str(&format!(" {kind}  R{i}\n"));
    }
    out.push_str("COLUMNS\n");
    let obj = problem.dense_objective();
    let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); problem.n_vars];
    for (i, row) in problem.rows.iter().enumerate() {
        for &(var, v) in &row.coeffs {
            if v != 0.0 {
                entries[var].push((i, v));
            }
        }
    }
    for j in 0..problem.n_vars {
        let col = problem.var_name(j);
        if obj[j] != 0.0 {
            out.push_str(&format!("    {col}  COST  {:.15e}\n", obj[j]));
        }
        for &(i, v) in &entries[j] {
            out.push_str(&format!("    {col}  R{i}  {v:.15e}\n"));
        }
    }
    out.push_str("RHS\n");
    for (i, row) in problem.rows.iter().enumerate() {
        if row.rhs != 0.0 {
            out.push_str(&format!("    RHS  R{i}  {:.15e}\n", row.rhs));
        }
    }
    out.push_str("BOUNDS\nENDATA\n");
    out
}
