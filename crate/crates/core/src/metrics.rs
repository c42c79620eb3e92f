//! Per-scenario statistics: congestion distribution, user walking
//! unfairness, and network totals relative to the user-equilibrium
//! baseline.

use thiserror::Error;

use crate::assignment::Assignment;
use crate::netmodel::Instance;
use crate::pathgen::ODPathSet;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("assignment does not match instance: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CongestionDistribution {
    /// Average relative arc excess.
    pub sigma_bar: f64,
    /// Average relative vertex excess.
    pub delta_bar: f64,
    /// Percentages of arcs+vertices with relative excess = 0,
    /// in (0, 0.25), and >= 0.25. Sum to 100.
    pub lambda_zero: f64,
    pub lambda_mid: f64,
    pub lambda_high: f64,
}

pub fn congestion_distribution(
    assignment: &Assignment,
    instance: &Instance,
) -> Result<CongestionDistribution, MetricsError> {
    check_shapes(assignment, instance)?;
    let mut sigma_bar = 0.0f64;
    let mut delta_bar = 0.0f64;
    let mut zero = 0usize;
    let mut mid = 0usize;
    let mut high = 0usize;
    let mut classify = |ratio: f64| {
        if ratio == 0.0 {
            zero += 1;
        } else if ratio >= 0.25 {
            high += 1;
        } else {
            mid += 1;
        }
    };
    for (s, arc) in assignment.arc_excess.iter().zip(&instance.arcs) {
        let r = s / arc.cap;
        sigma_bar += r;
        classify(r);
    }
    for (d, vertex) in assignment.vertex_excess.iter().zip(&instance.vertices) {
        let r = d / vertex.cap;
        delta_bar += r;
        classify(r);
    }
    sigma_bar /= instance.arcs.len() as f64;
    delta_bar /= instance.vertices.len() as f64;
    let total = (instance.arcs.len() + instance.vertices.len()) as f64;
    Ok(CongestionDistribution {
        sigma_bar,
        delta_bar,
        lambda_zero: 100.0 * zero as f64 / total,
        lambda_mid: 100.0 * mid as f64 / total,
        lambda_high: 100.0 * high as f64 / total,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserExperience {
    /// Relative walking unfairness per path, indexed like path_flows.
    pub per_path: Vec<Vec<f64>>,
    /// Demand-weighted average unfairness, in percent.
    pub u_bar_pct: f64,
}

pub fn user_experience(
    assignment: &Assignment,
    path_sets: &[ODPathSet],
) -> Result<UserExperience, MetricsError> {
    if assignment.path_flows.len() != path_sets.len() {
        return Err(MetricsError::Mismatch("path set count differs".into()));
    }
    let mut per_path = Vec::with_capacity(path_sets.len());
    let mut weighted = 0.0f64;
    let mut total_demand = 0.0f64;
    for (c, set) in path_sets.iter().enumerate() {
        if assignment.path_flows[c].len() != set.paths.len() {
            return Err(MetricsError::Mismatch(format!("path count differs for OD {}", set.od.id)));
        }
        let u: Vec<f64> = set
            .paths
            .iter()
            .map(|p| (p.time - set.shortest_time) / set.shortest_time)
            .collect();
        for (k, &uk) in u.iter().enumerate() {
            weighted += assignment.path_flows[c][k] * uk;
        }
        total_demand += set.od.demand;
        per_path.push(u);
    }
    Ok(UserExperience {
        per_path,
        u_bar_pct: 100.0 * weighted / total_demand,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkStats {
    /// Total walking time of the assignment, seconds.
    pub total_time: f64,
    /// Percent change of total walking time vs the baseline; absent when
    /// the baseline total is zero.
    pub t_pct: Option<f64>,
    /// Percent change of walking time spent on congested arcs vs the
    /// baseline; absent when the baseline has no congested arcs.
    pub sigma_pct: Option<f64>,
    /// Same for congested vertices.
    pub delta_pct: Option<f64>,
}

fn total_walking_time(a: &Assignment, instance: &Instance) -> f64 {
    // Path times decompose into arc walk times plus entered-vertex
    // traverse times, so TT is computable from arc flows and inflows.
    a.arc_flows
        .iter()
        .zip(&instance.arcs)
        .map(|(x, arc)| arc.walk_time * x)
        .sum::<f64>()
        + a.vertex_inflows
            .iter()
            .zip(&instance.vertices)
            .map(|(z, v)| v.traverse_time * z)
            .sum::<f64>()
}

fn congested_arc_time(a: &Assignment, instance: &Instance) -> f64 {
    a.arc_flows
        .iter()
        .zip(&a.arc_excess)
        .zip(&instance.arcs)
        .filter(|((_, s), _)| **s > 0.0)
        .map(|((x, _), arc)| arc.walk_time * x)
        .sum()
}

fn congested_vertex_time(a: &Assignment, instance: &Instance) -> f64 {
    a.vertex_inflows
        .iter()
        .zip(&a.vertex_excess)
        .zip(&instance.vertices)
        .filter(|((_, d), _)| **d > 0.0)
        .map(|((z, _), v)| v.traverse_time * z)
        .sum()
}

fn pct_change(value: f64, baseline: f64) -> Option<f64> {
    if baseline > 0.0 {
        Some(100.0 * (value - baseline) / baseline)
    } else {
        None
    }
}

fn check_shapes(assignment: &Assignment, instance: &Instance) -> Result<(), MetricsError> {
    if assignment.arc_flows.len() != instance.arcs.len()
        || assignment.vertex_inflows.len() != instance.vertices.len()
    {
        return Err(MetricsError::Mismatch("arc/vertex counts differ".into()));
    }
    Ok(())
}

/// T, Sigma, Delta: percent change of total walking time, congested-arc
/// walking time and congested-vertex walking time against the UE
/// baseline. Zero baselines make the statistic absent, never 0.
pub fn network_stats(
    assignment: &Assignment,
    baseline: &Assignment,
    instance: &Instance,
) -> Result<NetworkStats, MetricsError> {
    check_shapes(assignment, instance)?;
    check_shapes(baseline, instance)?;
    let tt = total_walking_time(assignment, instance);
    let tt_ue = total_walking_time(baseline, instance);
    Ok(NetworkStats {
        total_time: tt,
        t_pct: pct_change(tt, tt_ue),
        sigma_pct: pct_change(
            congested_arc_time(assignment, instance),
            congested_arc_time(baseline, instance),
        ),
        delta_pct: pct_change(
            congested_vertex_time(assignment, instance),
            congested_vertex_time(baseline, instance),
        ),
    })
}

/// One row of the sweep grid: every statistic for one (phi, alpha) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRecord {
    pub phi: f64,
    pub alpha: f64,
    pub tau: f64,
    pub eta: f64,
    pub objective: f64,
    pub total_time: f64,
    pub t_pct: Option<f64>,
    pub sigma_pct: Option<f64>,
    pub delta_pct: Option<f64>,
    pub sigma_bar: f64,
    pub delta_bar: f64,
    pub lambda_zero: f64,
    pub lambda_mid: f64,
    pub lambda_high: f64,
    pub u_bar_pct: f64,
    pub truncated: bool,
}

pub fn stats_record(
    assignment: &Assignment,
    baseline: &Assignment,
    instance: &Instance,
    path_sets: &[ODPathSet],
) -> Result<StatsRecord, MetricsError> {
    let cong = congestion_distribution(assignment, instance)?;
    let ux = user_experience(assignment, path_sets)?;
    let net = network_stats(assignment, baseline, instance)?;
    Ok(StatsRecord {
        phi: assignment.params.phi,
        alpha: assignment.params.alpha,
        tau: assignment.tau,
        eta: assignment.eta,
        objective: assignment.scalarized_objective,
        total_time: net.total_time,
        t_pct: net.t_pct,
        sigma_pct: net.sigma_pct,
        delta_pct: net.delta_pct,
        sigma_bar: cong.sigma_bar,
        delta_bar: cong.delta_bar,
        lambda_zero: cong.lambda_zero,
        lambda_mid: cong.lambda_mid,
        lambda_high: cong.lambda_high,
        u_bar_pct: ux.u_bar_pct,
        truncated: assignment.truncated,
    })
}
