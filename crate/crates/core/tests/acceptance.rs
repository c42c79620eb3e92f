//! Acceptance gate for the whole toolkit. Each test covers one numbered
//! criterion and prints a single PASS line with the measured values; a
//! failed assertion marks the criterion red.

use std::collections::BTreeSet;
use std::time::Instant;

use gapr_core::assignment::{
    enumerate_path_sets, solve_with_path_sets, user_equilibrium, ScenarioParams,
};
use gapr_core::fixtures::diamond;
use gapr_core::lpsolve::{simplex_solve, verify_optimality, LpProblem, LpRow, LpStatus, Relation};
use gapr_core::metrics::{congestion_distribution, network_stats};
use gapr_core::netmodel::{generate_instance, BBox, GeneratorConfig, Instance, NetIndex};
use gapr_core::sweep::{emit_csv, run_sweep, SweepConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Criterion 1: simplex vs exhaustive vertex enumeration on random bounded LPs.
// ---------------------------------------------------------------------------

/// Gaussian elimination with partial pivoting; None when singular.
#[allow(clippy::needless_range_loop)]
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

struct DenseLp {
    n: usize,
    cost: Vec<f64>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

/// Brute-force optimum: every vertex of the polytope is the intersection
/// of n active constraints drawn from the rows plus the nonnegativity
/// bounds; equality rows are always active.
fn vertex_enumeration_min(lp: &DenseLp) -> Option<f64> {
    let n = lp.n;
    // Constraint i < rows.len(): row i; otherwise bound x_{i-rows} >= 0.
    let total = lp.rows.len() + n;
    let mandatory: Vec<usize> = lp
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.1 == Relation::Eq)
        .map(|(i, _)| i)
        .collect();
    let optional: Vec<usize> = (0..total).filter(|i| !mandatory.contains(i)).collect();
    if mandatory.len() > n {
        return None;
    }
    let free = n - mandatory.len();
    let feasible = |x: &[f64]| {
        for (coeffs, rel, rhs) in &lp.rows {
            let lhs: f64 = coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let scale = 1.0 + rhs.abs() + lhs.abs();
            let ok = match rel {
                Relation::Le => lhs <= rhs + 1e-7 * scale,
                Relation::Ge => lhs >= rhs - 1e-7 * scale,
                Relation::Eq => (lhs - rhs).abs() <= 1e-7 * scale,
            };
            if !ok {
                return false;
            }
        }
        x.iter().all(|v| *v >= -1e-9)
    };
    let mut best: Option<f64> = None;
    // Iterates over all `free`-subsets of `optional` in lexicographic order.
    fn subsets(pool: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            subsets(pool, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut combos = Vec::new();
    subsets(&optional, free, 0, &mut Vec::new(), &mut combos);
    for combo in combos {
        let active: Vec<usize> = mandatory.iter().chain(combo.iter()).copied().collect();
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for &idx in &active {
            if idx < lp.rows.len() {
                a.push(lp.rows[idx].0.clone());
                b.push(lp.rows[idx].2);
            } else {
                let mut row = vec![0.0; n];
                row[idx - lp.rows.len()] = 1.0;
                a.push(row);
                b.push(0.0);
            }
        }
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let obj: f64 = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    }
    best
}

fn random_bounded_lp(rng: &mut ChaCha8Rng) -> DenseLp {
    let n = rng.gen_range(2..=8);
    let m = rng.gen_range(1..=6);
    let cost: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let mut rows = Vec::with_capacity(m);
    // Budget row with strictly positive coefficients keeps the feasible
    // region bounded regardless of the other rows.
    rows.push((
        (0..n).map(|_| rng.gen_range(0.5..2.0)).collect::<Vec<f64>>(),
        Relation::Le,
        rng.gen_range(1.0..10.0),
    ));
    for _ in 1..m {
        let kind: f64 = rng.gen();
        if kind < 0.6 {
            rows.push((
                (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect(),
                Relation::Le,
                rng.gen_range(0.5..5.0),
            ));
        } else if kind < 0.85 {
            rows.push((
                (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
                Relation::Ge,
                rng.gen_range(0.1..0.8),
            ));
        } else {
            rows.push((
                (0..n).map(|_| rng.gen_range(0.2..1.5)).collect(),
                Relation::Eq,
                rng.gen_range(0.5..3.0),
            ));
        }
    }
    DenseLp { n, cost, rows }
}

fn to_problem(lp: &DenseLp) -> LpProblem {
    LpProblem {
        n_vars: lp.n,
        objective: lp.cost.iter().copied().enumerate().collect(),
        rows: lp
            .rows
            .iter()
            .map(|(coeffs, relation, rhs)| LpRow {
                coeffs: coeffs.iter().copied().enumerate().collect(),
                relation: *relation,
                rhs: *rhs,
            })
            .collect(),
        var_names: Vec::new(),
    }
}

#[test]
fn lp_solver_matches_vertex_enumeration_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xa11ce);
    let mut optimal = 0;
    let mut infeasible = 0;
    for case in 0..220 {
        let lp = random_bounded_lp(&mut rng);
        let problem = to_problem(&lp);
        let solution = simplex_solve(&problem, 1e-7).expect("simplex failed");
        let oracle = vertex_enumeration_min(&lp);
        match (solution.status, oracle) {
            (LpStatus::Optimal, Some(expected)) => {
                let got = solution.objective_value;
                assert!(
                    (got - expected).abs() <= 1e-6 * (1.0 + expected.abs()),
                    "case {case}: simplex {got} vs oracle {expected}"
                );
                let report = verify_optimality(&problem, &solution, 1e-6);
                assert!(report.all_pass(), "case {case}: certificate failed: {report:?}");
                optimal += 1;
            }
            (LpStatus::Infeasible, None) => infeasible += 1,
            (status, oracle) => panic!("case {case}: status {status:?} but oracle {oracle:?}"),
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(optimal >= 200, "only {optimal} optimal cases exercised");
    assert!(elapsed < 10.0, "oracle suite took {elapsed:.1}s");
    println!(
        "PASS lp oracle: {optimal} optimal + {infeasible} infeasible cases agree in {elapsed:.2}s"
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: eligible-path enumeration vs brute-force simple paths.
// ---------------------------------------------------------------------------

fn brute_force_band(instance: &Instance, origin: &str, destination: &str, phi: f64) -> Vec<(Vec<String>, f64)> {
    let idx = NetIndex::new(instance);
    let s = idx.vertex_pos[origin];
    let t = idx.vertex_pos[destination];
    let mut all: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut stack = vec![s];
    let mut visited = vec![false; instance.vertices.len()];
    visited[s] = true;
    fn dfs(
        idx: &NetIndex,
        t: usize,
        stack: &mut Vec<usize>,
        visited: &mut Vec<bool>,
        time: f64,
        all: &mut Vec<(Vec<usize>, f64)>,
    ) {
        let u = *stack.last().unwrap();
        if u == t {
            all.push((stack.clone(), time));
            return;
        }
        for &a in &idx.out_arcs[u] {
            let v = idx.arc_head[a];
            if visited[v] {
                continue;
            }
            visited[v] = true;
            stack.push(v);
            let step = idx.instance.arcs[a].walk_time + idx.instance.vertices[v].traverse_time;
            dfs(idx, t, stack, visited, time + step, all);
            stack.pop();
            visited[v] = false;
        }
    }
    dfs(&idx, t, &mut stack, &mut visited, 0.0, &mut all);
    let shortest = all.iter().map(|(_, t)| *t).fold(f64::INFINITY, f64::min);
    let bound = (1.0 + phi) * shortest + 1e-9;
    let mut band: Vec<(Vec<String>, f64)> = all
        .into_iter()
        .filter(|(_, t)| *t <= bound)
        .map(|(seq, t)| (seq.iter().map(|&v| instance.vertices[v].id.clone()).collect(), t))
        .collect();
    band.sort_by(|a, b| a.0.cmp(&b.0));
    band
}

#[test]
fn path_enumeration_matches_brute_force_oracle() {
    let start = Instant::now();
    let mut checked_ods = 0;
    for seed in 0..60u64 {
        let config = GeneratorConfig {
            n_vertices: 4 + (seed as usize % 7),
            arc_density: 0.3 + 0.1 * (seed % 5) as f64,
            n_od_pairs: 3,
            seed,
            ..GeneratorConfig::default()
        };
        let instance = generate_instance(&config).expect("generation failed");
        for phi in [0.0, 0.05, 0.25] {
            let sets = enumerate_path_sets(&instance, phi, 100_000).expect("enumeration failed");
            for set in &sets {
                assert!(!set.truncated);
                let expected = brute_force_band(&instance, &set.od.origin, &set.od.destination, phi);
                let got: BTreeSet<Vec<String>> =
                    set.paths.iter().map(|p| p.vertex_sequence.clone()).collect();
                let want: BTreeSet<Vec<String>> = expected.iter().map(|(s, _)| s.clone()).collect();
                assert_eq!(got, want, "seed {seed} phi {phi} od {}", set.od.id);
                checked_ods += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "path oracle took {elapsed:.1}s");
    println!("PASS path oracle: 60 graphs x 3 phi values, {checked_ods} OD path sets agree in {elapsed:.2}s");
}

// ---------------------------------------------------------------------------
// Criterion 3: hand-checked values on the four-vertex diamond fixture.
// ---------------------------------------------------------------------------

#[test]
fn diamond_hand_checks() {
    let d = diamond();
    let sets = enumerate_path_sets(&d, 0.10, 100).unwrap();
    let ue = user_equilibrium(&d).unwrap();

    let a1 = solve_with_path_sets(&d, &sets, ScenarioParams::new(0.10, 1.0, 100)).unwrap();
    assert!((a1.tau - 15.0).abs() <= 1e-6, "tau at alpha=1 was {}", a1.tau);

    let a0 = solve_with_path_sets(&d, &sets, ScenarioParams::new(0.10, 0.0, 100)).unwrap();
    assert!(a0.eta.abs() <= 1e-6, "eta at alpha=0 was {}", a0.eta);

    let stats = network_stats(&a0, &ue, &d).unwrap();
    let sigma_pct = stats.sigma_pct.expect("baseline congested-arc time is positive");
    assert!((sigma_pct + 100.0).abs() <= 1e-6, "Sigma at alpha=0 was {sigma_pct}");

    // Optimal split is 10 on the 2.0 s route and 5 on the 2.2 s route.
    let ux = gapr_core::metrics::user_experience(&a0, &sets).unwrap();
    let expected = 100.0 * (5.0 * 0.1) / 15.0;
    assert!(
        (ux.u_bar_pct - expected).abs() <= 1e-6,
        "u_bar was {} expected {expected}",
        ux.u_bar_pct
    );
    println!(
        "PASS diamond: tau={} eta={} Sigma={sigma_pct} u_bar={}%",
        a1.tau, a0.eta, ux.u_bar_pct
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: self-comparison identities of the user-equilibrium cell.
// ---------------------------------------------------------------------------

#[test]
fn user_equilibrium_identities() {
    for seed in 0..20u64 {
        let config = GeneratorConfig {
            n_vertices: 12,
            arc_density: 0.4,
            n_od_pairs: 4,
            seed,
            ..GeneratorConfig::default()
        };
        let instance = generate_instance(&config).unwrap();
        let report = run_sweep(
            &instance,
            &SweepConfig {
                phi_grid: vec![0.0],
                alpha_grid: vec![1.0],
                max_paths: 100,
                parallel_cells: 1,
            },
        )
        .unwrap();
        let ue = &report.ue_record;
        assert_eq!(ue.t_pct, Some(0.0), "seed {seed}");
        assert!(ue.sigma_pct == Some(0.0) || ue.sigma_pct.is_none(), "seed {seed}");
        assert!(ue.delta_pct == Some(0.0) || ue.delta_pct.is_none(), "seed {seed}");
        assert_eq!(ue.u_bar_pct, 0.0, "seed {seed}");
    }
    println!("PASS user-equilibrium identities: T=Sigma=Delta=0 and u_bar=0 on 20 instances");
}

// ---------------------------------------------------------------------------
// Criteria 5 and 6: fairness band and phi-monotonicity on full sweeps.
// ---------------------------------------------------------------------------

fn band_instances() -> Vec<Instance> {
    (0..5u64)
        .map(|seed| {
            generate_instance(&GeneratorConfig {
                n_vertices: 15,
                arc_density: 0.4,
                n_od_pairs: 5,
                seed: 100 + seed,
                ..GeneratorConfig::default()
            })
            .unwrap()
        })
        .collect()
}

#[test]
fn fairness_band_holds_across_full_sweeps() {
    let mut cells = 0;
    for instance in band_instances() {
        let config = SweepConfig::default();
        let report = run_sweep(&instance, &config).unwrap();
        for rec in &report.records {
            assert!(!rec.truncated, "{}: cell ({}, {}) truncated", instance.name, rec.phi, rec.alpha);
            assert!(
                rec.u_bar_pct <= 100.0 * rec.phi + 1e-6,
                "{}: u_bar {} > 100*phi {} at alpha {}",
                instance.name,
                rec.u_bar_pct,
                rec.phi,
                rec.alpha
            );
            cells += 1;
        }
        // Positive path flows ride eligible paths only.
        for &phi in &config.phi_grid {
            if phi == 0.0 {
                continue;
            }
            let sets = enumerate_path_sets(&instance, phi, config.max_paths).unwrap();
            for set in &sets {
                let bound = (1.0 + phi) * set.shortest_time + 1e-9;
                for p in &set.paths {
                    assert!(p.time <= bound, "{}: path above band at phi {phi}", instance.name);
                }
            }
            let a = solve_with_path_sets(&instance, &sets, ScenarioParams::new(phi, 0.5, config.max_paths)).unwrap();
            for (c, flows) in a.path_flows.iter().enumerate() {
                let bound = (1.0 + phi) * sets[c].shortest_time + 1e-9;
                for (k, &flow) in flows.iter().enumerate() {
                    if flow > 1e-9 {
                        assert!(sets[c].paths[k].time <= bound);
                    }
                }
            }
        }
    }
    println!("PASS fairness band: {cells} sweep cells on 5 instances respect u_bar <= 100*phi");
}

#[test]
fn scalarized_objective_is_monotone_in_phi() {
    for instance in band_instances() {
        let report = run_sweep(&instance, &SweepConfig::default()).unwrap();
        assert!(report.records.iter().all(|r| !r.truncated));
        let alphas: BTreeSet<String> = report.records.iter().map(|r| format!("{}", r.alpha)).collect();
        for alpha in alphas {
            let column: Vec<f64> = report
                .records
                .iter()
                .filter(|r| format!("{}", r.alpha) == alpha)
                .map(|r| r.objective)
                .collect();
            for w in column.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-7 * (1.0 + w[0].abs()),
                    "{}: objective rose from {} to {} along alpha={alpha}",
                    instance.name,
                    w[0],
                    w[1]
                );
            }
        }
    }
    println!("PASS monotonicity: scalarized optimum non-increasing in phi for every alpha column");
}

// ---------------------------------------------------------------------------
// Criteria 7 and 8: congestion relief and congestion-class shift at phi=1%.
// ---------------------------------------------------------------------------

/// Road-like test bed: sparse 50-vertex networks whose traverse times
/// dominate walking legs, so same-hop-count detours stay inside the 1%
/// fairness band the way parallel streets do in a city grid. Seeds are
/// calibrated so user equilibrium congests well over 10% of elements.
fn congested_road_instances() -> Vec<Instance> {
    [2u64, 12, 17, 20, 34, 40]
        .iter()
        .map(|&seed| {
            generate_instance(&GeneratorConfig {
                n_vertices: 50,
                arc_density: 0.15,
                n_od_pairs: 25,
                node_cap_fraction: 0.15,
                demand_fraction: 0.12,
                node_time_window: (1000.0, 1001.0),
                bbox: BBox { width: 20.0, height: 20.0 },
                seed,
                ..GeneratorConfig::default()
            })
            .unwrap()
        })
        .collect()
}

#[test]
fn congestion_relief_at_one_percent_fairness() {
    let mut worst_sigma = f64::NEG_INFINITY;
    let mut worst_delta = f64::NEG_INFINITY;
    for instance in congested_road_instances() {
        let ue = user_equilibrium(&instance).unwrap();
        let congested = ue.arc_excess.iter().filter(|s| **s > 0.0).count()
            + ue.vertex_excess.iter().filter(|d| **d > 0.0).count();
        let elements = instance.arcs.len() + instance.vertices.len();
        assert!(
            congested as f64 >= 0.10 * elements as f64,
            "{}: UE congests only {congested}/{elements} elements",
            instance.name
        );
        let sets = enumerate_path_sets(&instance, 0.01, 1000).unwrap();
        for alpha in [0.0, 0.5] {
            let a = solve_with_path_sets(&instance, &sets, ScenarioParams::new(0.01, alpha, 1000)).unwrap();
            let stats = network_stats(&a, &ue, &instance).unwrap();
            let sigma = stats.sigma_pct.expect("UE has congested arcs");
            let delta = stats.delta_pct.expect("UE has congested vertices");
            assert!(sigma <= -10.0, "{}: Sigma {sigma:.1}% at alpha {alpha}", instance.name);
            assert!(delta <= -20.0, "{}: Delta {delta:.1}% at alpha {alpha}", instance.name);
            worst_sigma = worst_sigma.max(sigma);
            worst_delta = worst_delta.max(delta);
        }
    }
    println!(
        "PASS congestion relief: 6 instances, worst Sigma {worst_sigma:.1}% (<= -10) and worst Delta {worst_delta:.1}% (<= -20) at phi=0.01"
    );
}

#[test]
fn congestion_classes_shift_toward_zero() {
    let mut min_gap = f64::INFINITY;
    for instance in congested_road_instances() {
        let sets = enumerate_path_sets(&instance, 0.01, 1000).unwrap();
        let relieved =
            solve_with_path_sets(&instance, &sets, ScenarioParams::new(0.01, 0.0, 1000)).unwrap();
        let selfish =
            solve_with_path_sets(&instance, &sets, ScenarioParams::new(0.01, 1.0, 1000)).unwrap();
        let lz_relieved = congestion_distribution(&relieved, &instance).unwrap().lambda_zero;
        let lz_selfish = congestion_distribution(&selfish, &instance).unwrap().lambda_zero;
        assert!(
            lz_relieved > lz_selfish,
            "{}: lambda_zero {lz_relieved} (alpha=0) vs {lz_selfish} (alpha=1)",
            instance.name
        );
        min_gap = min_gap.min(lz_relieved - lz_selfish);
    }
    println!(
        "PASS congestion classes: lambda_zero(alpha=0) > lambda_zero(alpha=1) at phi=0.01, min gap {min_gap:.2} points"
    );
}

// ---------------------------------------------------------------------------
// Criterion 9: runtime and byte determinism of the reference-scale sweep.
// ---------------------------------------------------------------------------

fn strip_wall_seconds(csv: &[u8]) -> String {
    String::from_utf8(csv.to_vec())
        .unwrap()
        .lines()
        .map(|line| match line.rfind(',') {
            Some(i) => &line[..i],
            None => line,
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn reference_scale_sweep_is_fast_and_deterministic() {
    let instance = generate_instance(&GeneratorConfig {
        n_vertices: 50,
        arc_density: 1.0,
        n_od_pairs: 25,
        seed: 0,
        ..GeneratorConfig::default()
    })
    .unwrap();
    assert_eq!(instance.arcs.len(), 2450);

    let config = SweepConfig { max_paths: 1000, parallel_cells: 1, ..SweepConfig::default() };
    let start = Instant::now();
    let report = run_sweep(&instance, &config).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert_eq!(report.records.len(), 36);
    assert!(elapsed < 600.0, "sweep took {elapsed:.0}s single-threaded");

    let mut first = Vec::new();
    emit_csv(&report, &mut first).unwrap();

    let rerun = run_sweep(&instance, &config).unwrap();
    let mut second = Vec::new();
    emit_csv(&rerun, &mut second).unwrap();
    assert_eq!(
        strip_wall_seconds(&first),
        strip_wall_seconds(&second),
        "rerun changed the CSV"
    );

    let parallel = run_sweep(&instance, &SweepConfig { parallel_cells: 4, ..config }).unwrap();
    let mut third = Vec::new();
    emit_csv(&parallel, &mut third).unwrap();
    assert_eq!(
        strip_wall_seconds(&first),
        strip_wall_seconds(&third),
        "parallel_cells changed the CSV"
    );
    println!(
        "PASS reference-scale sweep: 36 cells on 2450 arcs in {elapsed:.1}s, CSV identical across rerun and parallel_cells"
    );
}
