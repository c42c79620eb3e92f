//! The (phi, alpha) grid sweep: solves the user equilibrium once, reuses
//! path sets across alpha values within each phi, gathers all statistics
//! and emits CSV rows for replotting.

use std::io::Write;
use std::time::Instant;

use thiserror::Error;

use crate::assignment::{self, AssignError, ScenarioParams};
use crate::metrics::{self, MetricsError, StatsRecord};
use crate::netmodel::Instance;

/// CSV header, fixed schema.
pub const CSV_HEADER: &str = "instance,phi,alpha,tau,eta,objective,total_time,T_pct,Sigma_pct,Delta_pct,sigma_bar,delta_bar,lambda_zero,lambda_mid,lambda_high,u_bar_pct,truncated,wall_seconds";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Nonnegative, sorted ascending, duplicate-free. phi = 0 contributes
    /// the single user-equilibrium cell (alpha = 1).
    pub phi_grid: Vec<f64>,
    /// In [0, 1], sorted descending, duplicate-free.
    pub alpha_grid: Vec<f64>,
    pub max_paths: usize,
    pub parallel_cells: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            phi_grid: vec![0.0, 0.01, 0.05, 0.10, 0.15, 0.20],
            alpha_grid: vec![1.0, 0.9, 0.7, 0.5, 0.3, 0.1, 0.0],
            max_paths: 1000,
            parallel_cells: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub instance_name: String,
    /// One record per grid cell, ordered by (phi asc, alpha desc).
    pub records: Vec<StatsRecord>,
    /// The (phi = 0, alpha = 1) baseline record.
    pub ue_record: StatsRecord,
    /// Wall-clock seconds per cell, parallel to `records`.
    pub wall_times: Vec<f64>,
    /// Diagnostics: number of times path enumeration ran (once per phi).
    pub path_set_builds: usize,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error("cell (phi={phi}, alpha={alpha}) failed: {source}")]
    Cell {
        phi: f64,
        alpha: f64,
        source: AssignError,
    },
    #[error("metrics failure: {0}")]
    Metrics(#[from] MetricsError),
    #[error("unknown phi {0} in report")]
    UnknownPhi(f64),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn check_grid(name: &str, grid: &[f64], ascending: bool) -> Result<(), SweepError> {
    if grid.is_empty() {
        return Err(SweepError::Config(format!("{name} is empty")));
    }
    for w in grid.windows(2) {
        let ordered = if ascending { w[0] < w[1] } else { w[0] > w[1] };
        if !ordered {
            return Err(SweepError::Config(format!(
                "{name} must be sorted {} and duplicate-free",
                if ascending { "ascending" } else { "descending" }
            )));
        }
    }
    Ok(())
}

impl SweepConfig {
    fn validate(&self) -> Result<(), SweepError> {
        check_grid("phi_grid", &self.phi_grid, true)?;
        check_grid("alpha_grid", &self.alpha_grid, false)?;
        if self.phi_grid[0] < 0.0 {
            return Err(SweepError::Config("phi values must be nonnegative".into()));
        }
        if self.alpha_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(SweepError::Config("alpha values must lie in [0, 1]".into()));
        }
        if self.max_paths == 0 || self.parallel_cells == 0 {
            return Err(SweepError::Config("max_paths and parallel_cells must be positive".into()));
        }
        Ok(())
    }
}

/// Runs the full grid. The UE baseline is solved first; within each phi
/// the path sets are computed once and shared across alpha cells. Cell
/// ordering in the report is deterministic regardless of
/// `parallel_cells`.
pub fn run_sweep(instance: &Instance, config: &SweepConfig) -> Result<SweepReport, SweepError> {
    config.validate()?;
    let cell_err = |phi: f64, alpha: f64| move |source: AssignError| SweepError::Cell { phi, alpha, source };

    let ue_start = Instant::now();
    let ue = assignment::user_equilibrium(instance).map_err(cell_err(0.0, 1.0))?;
    let ue_wall = ue_start.elapsed().as_secs_f64();
    let ue_sets = assignment::enumerate_path_sets(instance, 0.0, 1).map_err(cell_err(0.0, 1.0))?;
    let mut path_set_builds = 1usize;
    let ue_record = metrics::stats_record(&ue, &ue, instance, &ue_sets)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallel_cells)
        .build()
        .map_err(|e| SweepError::Config(format!("thread pool: {e}")))?;

    let mut records = Vec::new();
    let mut wall_times = Vec::new();
    for &phi in &config.phi_grid {
        if phi == 0.0 {
            records.push(ue_record.clone());
            wall_times.push(ue_wall);
            continue;
        }
        let sets = assignment::enumerate_path_sets(instance, phi, config.max_paths)
            .map_err(cell_err(phi, f64::NAN))?;
        path_set_builds += 1;
        let cells: Vec<Result<(StatsRecord, f64), SweepError>> = pool.install(|| {
            use rayon::prelude::*;
            config
                .alpha_grid
                .par_iter()
                .map(|&alpha| {
                    let start = Instant::now();
                    let a = assignment::solve_with_path_sets(
                        instance,
                        &sets,
                        ScenarioParams::new(phi, alpha, config.max_paths),
                    )
                    .map_err(cell_err(phi, alpha))?;
                    let rec = metrics::stats_record(&a, &ue, instance, &sets)?;
                    Ok((rec, start.elapsed().as_secs_f64()))
                })
                .collect()
        });
        for cell in cells {
            let (rec, wall) = cell?;
            records.push(rec);
            wall_times.push(wall);
        }
    }
    Ok(SweepReport {
        instance_name: instance.name.clone(),
        records,
        ue_record,
        wall_times,
        path_set_builds,
    })
}

/// Nondominated (tau, eta) points among the records at the given phi,
/// minimizing both, sorted by tau ascending.
pub fn pareto_extract(report: &SweepReport, phi: f64) -> Result<Vec<(f64, f64)>, SweepError> {
    let points: Vec<(f64, f64)> = report
        .records
        .iter()
        .filter(|r| (r.phi - phi).abs() <= 1e-12)
        .map(|r| (r.tau, r.eta))
        .collect();
    if points.is_empty() {
        return Err(SweepError::UnknownPhi(phi));
    }
    let mut frontier: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(t, e)| {
            !points
                .iter()
                .any(|&(t2, e2)| (t2 <= t && e2 <= e) && (t2 < t || e2 < e))
        })
        .copied()
        .collect();
    frontier.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    frontier.dedup();
    Ok(frontier)
}

/// Locale-independent decimal rendering with 9 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("round-trip of finite float");
    format!("{rounded}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// Writes the report as CSV (exact schema in [`CSV_HEADER`]); returns the
/// number of lines written including the header. Re-emitting the same
/// report is byte-identical.
pub fn emit_csv(report: &SweepReport, mut dest: impl Write) -> Result<usize, SweepError> {
    writeln!(dest, "{CSV_HEADER}")?;
    let mut lines = 1usize;
    for (rec, wall) in report.records.iter().zip(&report.wall_times) {
        writeln!(
            dest,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            report.instance_name,
            fmt_sig(rec.phi),
            fmt_sig(rec.alpha),
            fmt_sig(rec.tau),
            fmt_sig(rec.eta),
            fmt_sig(rec.objective),
            fmt_sig(rec.total_time),
            fmt_opt(rec.t_pct),
            fmt_opt(rec.sigma_pct),
            fmt_opt(rec.delta_pct),
            fmt_sig(rec.sigma_bar),
            fmt_sig(rec.delta_bar),
            fmt_sig(rec.lambda_zero),
            fmt_sig(rec.lambda_mid),
            fmt_sig(rec.lambda_high),
            fmt_sig(rec.u_bar_pct),
            rec.truncated,
            fmt_sig(*wall),
        )?;
        lines += 1;
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::diamond;

    #[test]
    fn default_grid_yields_36_cells() {
        let d = diamond();
        let config = SweepConfig {
            max_paths: 100,
            ..SweepConfig::default()
        };
        let report = run_sweep(&d, &config).unwrap();
        assert_eq!(report.records.len(), 36);
        assert_eq!(report.wall_times.len(), 36);
        assert_eq!(report.path_set_builds, 6);
        // Ordered by (phi asc, alpha desc); first record is the UE cell.
        assert_eq!(report.records[0].phi, 0.0);
        assert_eq!(report.records[0].alpha, 1.0);
        assert_eq!(report.records[0], report.ue_record);
        let mut expected = Vec::new();
        expected.push((0.0, 1.0));
        for &phi in &[0.01, 0.05, 0.10, 0.15, 0.20] {
            for &alpha in &[1.0, 0.9, 0.7, 0.5, 0.3, 0.1, 0.0] {
                expected.push((phi, alpha));
            }
        }
        let got: Vec<(f64, f64)> = report.records.iter().map(|r| (r.phi, r.alpha)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn single_ue_cell_grid() {
        let d = diamond();
        let config = SweepConfig {
            phi_grid: vec![0.0],
            alpha_grid: vec![1.0],
            max_paths: 10,
            parallel_cells: 1,
        };
        let report = run_sweep(&d, &config).unwrap();
        assert_eq!(report.records.len(), 1);
        let rec = &report.records[0];
        assert_eq!(rec.t_pct, Some(0.0));
        assert_eq!(rec.sigma_pct, Some(0.0));
        assert_eq!(rec.u_bar_pct, 0.0);
    }

    #[test]
    fn pareto_dominance_examples() {
        assert_eq!(dominant(vec![(15.0, 0.0), (15.5, 0.0)]), vec![(15.0, 0.0)]);
        assert_eq!(dominant(vec![(3.0, 1.0)]), vec![(3.0, 1.0)]);
        fn dominant(points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
            let report = SweepReport {
                instance_name: "x".into(),
                records: points
                    .iter()
                    .map(|&(tau, eta)| StatsRecord {
                        phi: 0.1,
                        alpha: 0.5,
                        tau,
                        eta,
                        objective: 0.0,
                        total_time: 0.0,
                        t_pct: None,
                        sigma_pct: None,
                        delta_pct: None,
                        sigma_bar: 0.0,
                        delta_bar: 0.0,
                        lambda_zero: 100.0,
                        lambda_mid: 0.0,
                        lambda_high: 0.0,
                        u_bar_pct: 0.0,
                        truncated: false,
                    })
                    .collect(),
                ue_record: StatsRecord {
                    phi: 0.0,
                    alpha: 1.0,
                    tau: 0.0,
                    eta: 0.0,
                    objective: 0.0,
                    total_time: 0.0,
                    t_pct: None,
                    sigma_pct: None,
                    delta_pct: None,
                    sigma_bar: 0.0,
                    delta_bar: 0.0,
                    lambda_zero: 100.0,
                    lambda_mid: 0.0,
                    lambda_high: 0.0,
                    u_bar_pct: 0.0,
                    truncated: false,
                },
                wall_times: vec![0.0; points.len()],
                path_set_builds: 1,
            };
            pareto_extract(&report, 0.1).unwrap()
        }
        use crate::metrics::StatsRecord;
    }

    #[test]
    fn diamond_pareto_extremes() {
        let d = diamond();
        let config = SweepConfig {
            phi_grid: vec![0.0, 0.10],
            alpha_grid: vec![1.0, 0.5, 0.0],
            max_paths: 100,
            parallel_cells: 1,
        };
        let report = run_sweep(&d, &config).unwrap();
        let frontier = pareto_extract(&report, 0.10).unwrap();
        // alpha=1: tau=15, eta=1.0 (sigma 5 on two arcs, t/cap 0.1 each);
        // alpha=0: tau=15.5, eta=0.
        assert!(frontier
            .iter()
            .any(|&(t, e)| (t - 15.0).abs() < 1e-9 && (e - 1.0).abs() < 1e-9));
        assert!(frontier
            .iter()
            .any(|&(t, e)| (t - 15.5).abs() < 1e-6 && e == 0.0));
        assert!(pareto_extract(&report, 0.33).is_err());
    }

    #[test]
    fn csv_line_count_and_determinism() {
        let d = diamond();
        let config = SweepConfig {
            max_paths: 100,
            ..SweepConfig::default()
        };
        let report = run_sweep(&d, &config).unwrap();
        let mut a = Vec::new();
        let lines = emit_csv(&report, &mut a).unwrap();
        assert_eq!(lines, 37);
        let text = String::from_utf8(a.clone()).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        // Absent Delta (no congested vertices in the diamond UE) must be
        // an empty field, not "0".
        let first_data = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = first_data.split(',').collect();
        assert_eq!(fields.len(), 18);
        assert_eq!(fields[9], "");
        let mut b = Vec::new();
        emit_csv(&report, &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parallel_cells_do_not_change_output() {
        let d = diamond();
        let mut serial = SweepConfig {
            max_paths: 100,
            ..SweepConfig::default()
        };
        let r1 = run_sweep(&d, &serial).unwrap();
        serial.parallel_cells = 4;
        let r2 = run_sweep(&d, &serial).unwrap();
        assert_eq!(r1.records, r2.records);
    }

    #[test]
    fn fmt_sig_is_locale_independent_and_rounded() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.5), "1.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig(-49.1400000001), "-49.14");
    }

    #[test]
    fn bad_grids_rejected() {
        let d = diamond();
        let bad = SweepConfig {
            phi_grid: vec![0.1, 0.05],
            ..SweepConfig::default()
        };
        assert!(matches!(run_sweep(&d, &bad), Err(SweepError::Config(_))));
        let dup = SweepConfig {
            alpha_grid: vec![1.0, 1.0],
            ..SweepConfig::default()
        };
        assert!(matches!(run_sweep(&d, &dup), Err(SweepError::Config(_))));
    }
}
