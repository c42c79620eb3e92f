//! Assembles the scalarized path-flow LP for one (phi, alpha) scenario,
//! solves it and extracts a complete flow assignment, including the
//! user-equilibrium baseline.
//!
//! Decision variables are the path flows `y` plus the arc and vertex
//! excess variables; total arc flows and vertex inflows are linear in `y`
//! and substituted out of the LP, then reconstructed exactly during
//! extraction. Excesses are post-processed to `max(0, flow - cap)` so
//! reported congestion is meaningful even at `alpha = 1`, where the LP
//! leaves them unpenalized.

use serde_json::json;
use thiserror::Error;

use crate::lpsolve::{self, LpError, LpProblem, LpRow, LpStatus, Relation};
use crate::netmodel::{Instance, NetIndex};
use crate::pathgen::{self, ODPathSet, PathError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams {
    pub phi: f64,
    /// Weight on the walking-time objective; `1 - alpha` weighs the
    /// congestion-excess objective.
    pub alpha: f64,
    pub max_paths: usize,
}

impl ScenarioParams {
    pub fn new(phi: f64, alpha: f64, max_paths: usize) -> Self {
        assert!(phi >= 0.0, "phi must be nonnegative");
        assert!((0.0..=1.0).contains(&alpha), "alpha must lie in [0, 1]");
        assert!(max_paths > 0, "max_paths must be positive");
        ScenarioParams { phi, alpha, max_paths }
    }
}

/// Which LP column is which semantic variable.
#[derive(Debug, Clone)]
pub struct VarMap {
    /// Column index of y for (od index, path index), in column order.
    pub y_cols: Vec<(usize, usize)>,
    pub sigma_start: usize,
    pub delta_start: usize,
    pub n_cols: usize,
}

#[derive(Debug, Clone)]
pub struct Assignment {
    pub params: ScenarioParams,
    /// Path flows y, indexed [od][path] in path-set order.
    pub path_flows: Vec<Vec<f64>>,
    /// Total flow per arc, in instance arc order.
    pub arc_flows: Vec<f64>,
    /// Inflow per vertex, in instance vertex order.
    pub vertex_inflows: Vec<f64>,
    /// max(0, flow - cap) per arc.
    pub arc_excess: Vec<f64>,
    /// max(0, inflow - cap) per vertex.
    pub vertex_excess: Vec<f64>,
    /// Total relative increase in walking time.
    pub tau: f64,
    /// Total relative capacity excess weighted by traversing time.
    pub eta: f64,
    pub scalarized_objective: f64,
    /// True when any OD's path set was truncated at max_paths.
    pub truncated: bool,
    pub lp_iterations: usize,
}

#[derive(Debug, Error)]
pub enum AssignError {
    #[error("no eligible paths for OD pair {0}")]
    NoEligiblePaths(String),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// One eligible path set per OD pair, in instance order.
pub fn enumerate_path_sets(
    instance: &Instance,
    phi: f64,
    max_paths: usize,
) -> Result<Vec<ODPathSet>, AssignError> {
    instance
        .od_pairs
        .iter()
        .map(|od| pathgen::enumerate_eligible_paths(instance, od, phi, max_paths).map_err(Into::into))
        .collect()
}

/// Builds the scalarized LP: demand equalities per OD, one soft capacity
/// row per arc and per vertex, objective `alpha * t_ck / t_cSP` on path
/// flows and `(1 - alpha) * t / cap` on the excess variables.
pub fn build_gacpr_lp(
    instance: &Instance,
    path_sets: &[ODPathSet],
    alpha: f64,
) -> Result<(LpProblem, VarMap), AssignError> {
    assert!((0.0..=1.0).contains(&alpha), "alpha must lie in [0, 1]");
    let idx = NetIndex::new(instance);
    let n_arcs = instance.arcs.len();
    let n_vertices = instance.vertices.len();

    let mut y_cols = Vec::new();
    let mut objective = Vec::new();
    let mut var_names = Vec::new();
    let mut demand_rows: Vec<LpRow> = instance
        .od_pairs
        .iter()
        .map(|od| LpRow {
            coeffs: Vec::new(),
            relation: Relation::Eq,
            rhs: od.demand,
        })
        .collect();
    let mut arc_rows: Vec<LpRow> = instance
        .arcs
        .iter()
        .map(|a| LpRow {
            coeffs: Vec::new(),
            relation: Relation::Le,
            rhs: a.cap,
        })
        .collect();
    let mut vertex_rows: Vec<LpRow> = instance
        .vertices
        .iter()
        .map(|v| LpRow {
            coeffs: Vec::new(),
            relation: Relation::Le,
            rhs: v.cap,
        })
        .collect();

    let mut col = 0usize;
    for (c, set) in path_sets.iter().enumerate() {
        if set.paths.is_empty() {
            return Err(AssignError::NoEligiblePaths(instance.od_pairs[c].id.clone()));
        }
        for (k, path) in set.paths.iter().enumerate() {
            let coef = alpha * (path.time / set.shortest_time);
            if coef != 0.0 {
                objective.push((col, coef));
            }
            demand_rows[c].coeffs.push((col, 1.0));
            for w in path.vertex_sequence.windows(2) {
                let t = idx.vertex_pos[w[0].as_str()];
                let h = idx.vertex_pos[w[1].as_str()];
                let arc = idx.arc_by_pair[&(t, h)];
                arc_rows[arc].coeffs.push((col, 1.0));
                vertex_rows[h].coeffs.push((col, 1.0));
            }
            var_names.push(format!("y_{}_{k}", set.od.id));
            y_cols.push((c, k));
            col += 1;
        }
    }
    let sigma_start = col;
    for (a, arc) in instance.arcs.iter().enumerate() {
        let coef = (1.0 - alpha) * (arc.walk_time / arc.cap);
        if coef != 0.0 {
            objective.push((col, coef));
        }
        arc_rows[a].coeffs.push((col, -1.0));
        var_names.push(format!("sigma_{}_{}", arc.tail, arc.head));
        col += 1;
    }
    let delta_start = col;
    for (h, vertex) in instance.vertices.iter().enumerate() {
        let coef = (1.0 - alpha) * (vertex.traverse_time / vertex.cap);
        if coef != 0.0 {
            objective.push((col, coef));
        }
        vertex_rows[h].coeffs.push((col, -1.0));
        var_names.push(format!("delta_{}", vertex.id));
        col += 1;
    }

    let mut rows = demand_rows;
    rows.extend(arc_rows);
    rows.extend(vertex_rows);
    let problem = LpProblem {
        n_vars: col,
        objective,
        rows,
        var_names,
    };
    let map = VarMap {
        y_cols,
        sigma_start,
        delta_start,
        n_cols: col,
    };
    let _ = n_arcs;
    let _ = n_vertices;
    Ok((problem, map))
}

/// Solves one scenario against precomputed path sets (the sweep computes
/// path sets once per phi and reuses them across alpha values).
pub fn solve_with_path_sets(
    instance: &Instance,
    path_sets: &[ODPathSet],
    params: ScenarioParams,
) -> Result<Assignment, AssignError> {
    let (problem, map) = build_gacpr_lp(instance, path_sets, params.alpha)?;
    let solution = lpsolve::simplex_solve(&problem, lpsolve::FEAS_TOL)?;
    match solution.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            // Cannot occur for a valid instance: demand rows are always
            // satisfiable because excesses are unbounded above.
            return Err(AssignError::Internal("scenario LP reported infeasible".into()));
        }
        LpStatus::Unbounded => {
            return Err(AssignError::Internal("scenario LP reported unbounded".into()));
        }
    }

    let idx = NetIndex::new(instance);
    let mut path_flows: Vec<Vec<f64>> = path_sets.iter().map(|s| vec![0.0; s.paths.len()]).collect();
    for (col, &(c, k)) in map.y_cols.iter().enumerate() {
        path_flows[c][k] = solution.primal[col].max(0.0);
    }
    let mut arc_flows = vec![0.0f64; instance.arcs.len()];
    let mut vertex_inflows = vec![0.0f64; instance.vertices.len()];
    let mut tau = 0.0f64;
    for (c, set) in path_sets.iter().enumerate() {
        for (k, path) in set.paths.iter().enumerate() {
            let y = path_flows[c][k];
            if y == 0.0 {
                continue;
            }
            tau += (path.time / set.shortest_time) * y;
            for w in path.vertex_sequence.windows(2) {
                let t = idx.vertex_pos[w[0].as_str()];
                let h = idx.vertex_pos[w[1].as_str()];
                arc_flows[idx.arc_by_pair[&(t, h)]] += y;
                vertex_inflows[h] += y;
            }
        }
    }
    let arc_excess: Vec<f64> = arc_flows
        .iter()
        .zip(&instance.arcs)
        .map(|(x, a)| (x - a.cap).max(0.0))
        .collect();
    let vertex_excess: Vec<f64> = vertex_inflows
        .iter()
        .zip(&instance.vertices)
        .map(|(z, v)| (z - v.cap).max(0.0))
        .collect();
    let eta = arc_excess
        .iter()
        .zip(&instance.arcs)
        .map(|(s, a)| (a.walk_time / a.cap) * s)
        .sum::<f64>()
        + vertex_excess
            .iter()
            .zip(&instance.vertices)
            .map(|(d, v)| (v.traverse_time / v.cap) * d)
            .sum::<f64>();
    Ok(Assignment {
        params,
        path_flows,
        arc_flows,
        vertex_inflows,
        arc_excess,
        vertex_excess,
        tau,
        eta,
        scalarized_objective: params.alpha * tau + (1.0 - params.alpha) * eta,
        truncated: path_sets.iter().any(|s| s.truncated),
        lp_iterations: solution.iterations,
    })
}

pub fn solve_assignment(instance: &Instance, params: ScenarioParams) -> Result<Assignment, AssignError> {
    let path_sets = enumerate_path_sets(instance, params.phi, params.max_paths)?;
    solve_with_path_sets(instance, &path_sets, params)
}

/// The paper's baseline: every OD's full demand rides its tie-broken
/// shortest path, i.e. `solve_assignment` at phi = 0, alpha = 1.
pub fn user_equilibrium(instance: &Instance) -> Result<Assignment, AssignError> {
    solve_assignment(instance, ScenarioParams::new(0.0, 1.0, 1))
}

/// JSON dump of one solved scenario; only strictly positive flows and
/// excesses are listed.
pub fn assignment_to_json(
    instance: &Instance,
    path_sets: &[ODPathSet],
    assignment: &Assignment,
) -> serde_json::Value {
    let mut flows = Vec::new();
    for (c, set) in path_sets.iter().enumerate() {
        for (k, path) in set.paths.iter().enumerate() {
            let y = assignment.path_flows[c][k];
            if y > 0.0 {
                flows.push(json!({
                    "od": set.od.id,
                    "path": path.vertex_sequence,
                    "flow": y,
                }));
            }
        }
    }
    let arc_excess: Vec<_> = instance
        .arcs
        .iter()
        .zip(&assignment.arc_excess)
        .filter(|(_, s)| **s > 0.0)
        .map(|(a, s)| json!({"tail": a.tail, "head": a.head, "sigma": s}))
        .collect();
    let vertex_excess: Vec<_> = instance
        .vertices
        .iter()
        .zip(&assignment.vertex_excess)
        .filter(|(_, d)| **d > 0.0)
        .map(|(v, d)| json!({"id": v.id, "delta": d}))
        .collect();
    json!({
        "phi": assignment.params.phi,
        "alpha": assignment.params.alpha,
        "tau": assignment.tau,
        "eta": assignment.eta,
        "objective": assignment.scalarized_objective,
        "path_flows": flows,
        "arc_excess": arc_excess,
        "vertex_excess": vertex_excess,
    })
}
