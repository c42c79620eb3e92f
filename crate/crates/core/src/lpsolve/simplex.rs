//! Revised primal simplex core over standard-form (all-equality)
//! problems. Dense basis inverse with product-form updates; the inverse
//! is refactorized from scratch when a periodic residual check detects
//! numerical drift.

// Dense matrix kernels read better with explicit row/column indices.
#![allow(clippy::needless_range_loop)]

use super::{LpError, LpProblem, LpStatus, Relation};

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_TOL: f64 = 1e-9;
const DRIFT_CHECK_INTERVAL: usize = 100;
const DRIFT_TOL: f64 = 1e-9;

pub(crate) struct StdOutcome {
    pub status: LpStatus,
    /// One value per standard-form variable (meaningful when optimal).
    pub x: Vec<f64>,
    /// One multiplier per row, in the caller's row orientation.
    pub duals: Vec<f64>,
    pub iterations: usize,
    pub degenerate_pivots: usize,
}

struct Tableau {
    m: usize,
    /// All columns (structural + artificial), sparse by row.
    cols: Vec<Vec<(u32, f64)>>,
    b: Vec<f64>,
    /// Phase-2 costs per column (artificials have zero).
    cost: Vec<f64>,
    /// Row-major dense basis inverse, m * m.
    binv: Vec<f64>,
    x_b: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    banned: Vec<bool>,
    /// First artificial column index; columns >= this never re-enter.
    artificial_start: usize,
    iterations: usize,
    degenerate_pivots: usize,
    bland: bool,
    degenerate_limit: usize,
    iteration_cap: usize,
    tol: f64,
}

impl Tableau {
    fn col_times_binv(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|w| *w = 0.0);
        for &(r, v) in &self.cols[j] {
            let r = r as usize;
            for i in 0..self.m {
                out[i] += v * self.binv[i * self.m + r];
            }
        }
    }

    fn duals_for(&self, cost: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = cost[bj];
            if cb != 0.0 {
                let row = &self.binv[i * self.m..(i + 1) * self.m];
                for (yk, &rk) in y.iter_mut().zip(row) {
                    if rk != 0.0 {
                        *yk += cb * rk;
                    }
                }
            }
        }
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        let mut rc = cost[j];
        for &(r, v) in &self.cols[j] {
            rc -= y[r as usize] * v;
        }
        rc
    }

    /// Entering column under the active pricing rule, or None at optimality.
    fn price(&self, cost: &[f64], y: &[f64], allow_artificial: bool) -> Option<usize> {
        let n = if allow_artificial { self.cols.len() } else { self.artificial_start };
        if self.bland {
            for j in 0..n {
                if self.is_basic[j] || self.banned[j] {
                    continue;
                }
                if self.reduced_cost(cost, y, j) < -self.tol {
                    return Some(j);
                }
            }
            None
        } else {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                if self.is_basic[j] || self.banned[j] {
                    continue;
                }
                let rc = self.reduced_cost(cost, y, j);
                if rc < -self.tol {
                    match best {
                        Some((_, brc)) if brc <= rc => {}
                        _ => best = Some((j, rc)),
                    }
                }
            }
            best.map(|(j, _)| j)
        }
    }

    /// Leaving row by the minimum ratio test; ties go to the lowest basic
    /// variable index. None means no positive pivot entry.
    fn ratio_test(&self, w: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            if w[i] > PIVOT_TOL {
                let ratio = self.x_b[i].max(0.0) / w[i];
                match best {
                    None => best = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12
                            || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi])
                        {
                            best = Some((i, ratio));
                        }
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, entering: usize, row: usize, w: &[f64]) {
        let m = self.m;
        let ratio = self.x_b[row].max(0.0) / w[row];
        if ratio < DEGENERATE_TOL {
            self.degenerate_pivots += 1;
            if self.degenerate_pivots > self.degenerate_limit {
                self.bland = true;
            }
        }
        let pr = 1.0 / w[row];
        {
            let r_slice = &mut self.binv[row * m..(row + 1) * m];
            for v in r_slice.iter_mut() {
                *v *= pr;
            }
        }
        self.x_b[row] *= pr;
        let xr = self.x_b[row];
        for i in 0..m {
            if i == row {
                continue;
            }
            let f = w[i];
            if f == 0.0 {
                continue;
            }
            // Disjoint row views of the row-major inverse.
            let (lo, hi) = if i < row { (i, row) } else { (row, i) };
            let (head, tail) = self.binv.split_at_mut(hi * m);
            let src;
            let dst;
            if i < row {
                dst = &mut head[lo * m..(lo + 1) * m];
                src = &tail[..m];
            } else {
                src = &head[lo * m..(lo + 1) * m];
                dst = &mut tail[..m];
            }
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d -= f * s;
            }
            self.x_b[i] -= f * xr;
        }
        let leaving = self.basis[row];
        self.is_basic[leaving] = false;
        if leaving >= self.artificial_start {
            self.banned[leaving] = true;
        }
        self.basis[row] = entering;
        self.is_basic[entering] = true;
    }

    fn residual_inf(&self) -> f64 {
        let m = self.m;
        let mut ax = vec![0.0f64; m];
        for (i, &bj) in self.basis.iter().enumerate() {
            let xv = self.x_b[i];
            for &(r, v) in &self.cols[bj] {
                ax[r as usize] += v * xv;
            }
        }
        ax.iter()
            .zip(&self.b)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn refactorize(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut dense = vec![0.0f64; m * m];
        for (col, &bj) in self.basis.iter().enumerate() {
            for &(r, v) in &self.cols[bj] {
                dense[r as usize * m + col] = v;
            }
        }
        // Gauss-Jordan with partial pivoting: [B | I] -> [I | B^-1].
        let mut inv = vec![0.0f64; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut piv = col;
            let mut best = dense[col * m + col].abs();
            for r in (col + 1)..m {
                let v = dense[r * m + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-12 {
                return Err(LpError::Numerical("singular basis during refactorization".into()));
            }
            if piv != col {
                for k in 0..m {
                    dense.swap(col * m + k, piv * m + k);
                    inv.swap(col * m + k, piv * m + k);
                }
            }
            let p = dense[col * m + col];
            for k in 0..m {
                dense[col * m + k] /= p;
                inv[col * m + k] /= p;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = dense[r * m + col];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    dense[r * m + k] -= f * dense[col * m + k];
                    inv[r * m + k] -= f * inv[col * m + k];
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.x_b[i] = row.iter().zip(&self.b).map(|(a, b)| a * b).sum();
        }
        Ok(())
    }

    /// Runs simplex iterations for the given costs until optimality.
    /// Returns false when phase 2 detects unboundedness.
    fn run(&mut self, cost: &[f64], phase_one: bool) -> Result<bool, LpError> {
        let m = self.m;
        let mut y = vec![0.0f64; m];
        let mut w = vec![0.0f64; m];
        loop {
            if self.iterations >= self.iteration_cap {
                return Err(LpError::IterationLimit(self.iterations));
            }
            self.duals_for(cost, &mut y);
            let entering = match self.price(cost, &y, false) {
                Some(j) => j,
                None => return Ok(true),
            };
            self.col_times_binv(entering, &mut w);
            let row = match self.ratio_test(&w) {
                Some(r) => r,
                None => {
                    if phase_one {
                        return Err(LpError::Numerical(
                            "phase-1 objective unbounded; basis lost".into(),
                        ));
                    }
                    return Ok(false);
                }
            };
            self.pivot(entering, row, &w);
            self.iterations += 1;
            if self.iterations.is_multiple_of(DRIFT_CHECK_INTERVAL) {
                let scale = 1.0 + self.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if self.residual_inf() > DRIFT_TOL * scale {
                    self.refactorize()?;
                }
            }
        }
    }
}

pub(crate) fn solve_standard(problem: &LpProblem, tol: f64) -> Result<StdOutcome, LpError> {
    let m = problem.rows.len();
    let n = problem.n_vars;

    // Row orientation: flip rows so every rhs is nonnegative.
    let mut row_sign = vec![1.0f64; m];
    let mut b = vec![0.0f64; m];
    let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (i, row) in problem.rows.iter().enumerate() {
        debug_assert_eq!(row.relation, Relation::Eq);
        let s = if row.rhs < 0.0 { -1.0 } else { 1.0 };
        row_sign[i] = s;
        b[i] = s * row.rhs;
        for &(j, v) in &row.coeffs {
            if v != 0.0 {
                cols[j].push((i as u32, s * v));
            }
        }
    }

    // Initial basis: unit columns where available, artificials elsewhere.
    let mut basis = vec![usize::MAX; m];
    for (j, col) in cols.iter().enumerate() {
        if col.len() == 1 && col[0].1 == 1.0 {
            let r = col[0].0 as usize;
            if basis[r] == usize::MAX {
                basis[r] = j;
            }
        }
    }
    let artificial_start = n;
    let mut n_artificial = 0usize;
    for (r, slot) in basis.iter_mut().enumerate() {
        if *slot == usize::MAX {
            cols.push(vec![(r as u32, 1.0)]);
            *slot = artificial_start + n_artificial;
            n_artificial += 1;
        }
    }
    let n_total = cols.len();

    let mut cost = vec![0.0f64; n_total];
    for &(j, v) in &problem.objective {
        cost[j] += v;
    }
    let mut is_basic = vec![false; n_total];
    for &bj in &basis {
        is_basic[bj] = true;
    }
    let mut binv = vec![0.0f64; m * m];
    for i in 0..m {
        binv[i * m + i] = 1.0;
    }

    let mut t = Tableau {
        m,
        cols,
        b: b.clone(),
        cost,
        binv,
        x_b: b.clone(),
        basis,
        is_basic,
        banned: vec![false; n_total],
        artificial_start,
        iterations: 0,
        degenerate_pivots: 0,
        bland: false,
        degenerate_limit: 3 * (m + n_total),
        iteration_cap: 50 * (m + n_total + 1),
        tol,
    };

    let b_scale = 1.0 + b.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    if n_artificial > 0 {
        let mut phase1_cost = vec![0.0f64; n_total];
        for c in phase1_cost.iter_mut().skip(artificial_start) {
            *c = 1.0;
        }
        t.run(&phase1_cost, true)?;
        let infeas: f64 = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &bj)| bj >= artificial_start)
            .map(|(i, _)| t.x_b[i].max(0.0))
            .sum();
        if infeas > tol.max(super::FEAS_TOL) * b_scale {
            return Ok(StdOutcome {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                duals: Vec::new(),
                iterations: t.iterations,
                degenerate_pivots: t.degenerate_pivots,
            });
        }
        // Pivot remaining zero-level artificials out where a structural
        // column can replace them; rows with no candidate are redundant.
        for r in 0..m {
            if t.basis[r] < artificial_start {
                continue;
            }
            let mut w = vec![0.0f64; m];
            let mut replacement = None;
            for j in 0..artificial_start {
                if t.is_basic[j] {
                    continue;
                }
                t.col_times_binv(j, &mut w);
                if w[r].abs() > 1e-7 {
                    replacement = Some((j, w.clone()));
                    break;
                }
            }
            if let Some((j, w)) = replacement {
                // Degenerate exchange: x_b[r] is (numerically) zero.
                let leaving = t.basis[r];
                let pr = 1.0 / w[r];
                for k in 0..m {
                    if k == r {
                        continue;
                    }
                    let f = w[k];
                    if f == 0.0 {
                        continue;
                    }
                    for col in 0..m {
                        let vr = t.binv[r * m + col] * pr;
                        t.binv[k * m + col] -= f * vr;
                    }
                    t.x_b[k] -= f * t.x_b[r] * pr;
                }
                for col in 0..m {
                    t.binv[r * m + col] *= pr;
                }
                t.x_b[r] *= pr;
                t.is_basic[leaving] = false;
                t.banned[leaving] = true;
                t.basis[r] = j;
                t.is_basic[j] = true;
            }
        }
        for bflag in t.banned.iter_mut().skip(artificial_start) {
            *bflag = true;
        }
        for (r, &bj) in t.basis.iter().enumerate() {
            if bj >= artificial_start {
                t.banned[bj] = true;
                let _ = r;
            }
        }
    }

    let phase2_cost = t.cost.clone();
    let bounded = t.run(&phase2_cost, false)?;
    if !bounded {
        return Ok(StdOutcome {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            duals: Vec::new(),
            iterations: t.iterations,
            degenerate_pivots: t.degenerate_pivots,
        });
    }

    let mut x = vec![0.0f64; n];
    for (i, &bj) in t.basis.iter().enumerate() {
        if bj < n {
            x[bj] = t.x_b[i].max(0.0);
        }
    }
    let mut y = vec![0.0f64; m];
    t.duals_for(&phase2_cost, &mut y);
    let duals: Vec<f64> = y.iter().zip(&row_sign).map(|(yi, s)| yi * s).collect();
    Ok(StdOutcome {
        status: LpStatus::Optimal,
        x,
        duals,
        iterations: t.iterations,
        degenerate_pivots: t.degenerate_pivots,
    })
}
