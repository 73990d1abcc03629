//! Dense linear programming: problem container and a two-phase simplex
//! solver with a lexicographic anti-cycling ratio test.
//!
//! Columns are priced by the most negative reduced cost; the leaving row is
//! the lexicographic minimum over `(rhs, B^-1)` among the minimum-ratio
//! candidates, which rules out cycling on the heavily degenerate equilibrium
//! programs this crate produces and stays deterministic under floating
//! point (Bland's rule, by contrast, assumes exact ratio ties). Inputs are
//! equilibrated to unit row/column magnitude before the solve.

use crate::error::{Error, Result};

/// Entries at or below this are treated as zero throughout pivoting.
const ZERO_TOL: f64 = 1e-11;
/// Reduced costs above `-OPT_TOL` count as optimal.
const OPT_TOL: f64 = 1e-9;
/// Residual phase-1 objective above this means infeasible.
const FEAS_TOL: f64 = 1e-8;

/// `minimize c.v  subject to  A v = b,  G v <= h,  v_j >= 0` unless the
/// variable is marked free.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    eq: Vec<(Vec<f64>, f64)>,
    le: Vec<(Vec<f64>, f64)>,
    free: Vec<bool>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![0.0; num_vars],
            eq: Vec::new(),
            le: Vec::new(),
            free: vec![false; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_objective(&mut self, coeffs: Vec<f64>) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.objective = coeffs;
    }

    pub fn objective_coeff(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    /// Adds `delta` to the objective coefficient of `var`.
    pub fn add_objective_coeff(&mut self, var: usize, delta: f64) {
        self.objective[var] += delta;
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.num_vars);
        self.eq.push((row, rhs));
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.num_vars);
        self.le.push((row, rhs));
    }

    /// Drops the default `>= 0` bound on `var`.
    pub fn set_free(&mut self, var: usize) {
        self.free[var] = true;
    }

    pub fn num_eq(&self) -> usize {
        self.eq.len()
    }

    pub fn num_le(&self) -> usize {
        self.le.len()
    }

    fn validate(&self) -> Result<()> {
        let all_finite = self.objective.iter().all(|v| v.is_finite())
            && self
                .eq
                .iter()
                .chain(&self.le)
                .all(|(row, rhs)| rhs.is_finite() && row.iter().all(|v| v.is_finite()));
        if !all_finite {
            return Err(Error::InvalidConfig(
                "linear program contains non-finite coefficients".into(),
            ));
        }
        Ok(())
    }
}

/// Optimal basic solution returned by [`simplex_solve`].
#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Optimal point in the original variable space.
    pub x: Vec<f64>,
    /// Objective value `c.x`.
    pub value: f64,
    /// Dual multipliers for the equality rows, satisfying
    /// `value = duals_eq.b + duals_le.h` at the optimum.
    pub duals_eq: Vec<f64>,
    /// Dual multipliers for the inequality rows.
    pub duals_le: Vec<f64>,
    /// Largest primal constraint violation at return.
    pub max_residual: f64,
    /// Simplex pivots performed across both phases.
    pub iterations: usize,
}

/// Solves the linear program, returning an optimal basic feasible solution
/// or [`Error::Infeasible`] / [`Error::Unbounded`] / [`Error::IterationLimit`].
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;

    // Equilibrate: scale rows, then columns, to unit max magnitude. Mixed
    // scales (penalty costs around 1e3 against unit rows) otherwise amplify
    // through pivot chains until the reduced costs are pure noise.
    let num_rows = lp.eq.len() + lp.le.len();
    let mut scaled_rows: Vec<Vec<f64>> = Vec::with_capacity(num_rows);
    let mut scaled_rhs: Vec<f64> = Vec::with_capacity(num_rows);
    let mut row_scale = Vec::with_capacity(num_rows);
    for (row, b) in lp.eq.iter().chain(&lp.le) {
        let scale = row
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .max(1e-12);
        scaled_rows.push(row.iter().map(|v| v / scale).collect());
        scaled_rhs.push(b / scale);
        row_scale.push(scale);
    }
    let mut col_scale = vec![1.0f64; lp.num_vars];
    for (var, scale) in col_scale.iter_mut().enumerate() {
        let max_abs = scaled_rows
            .iter()
            .fold(0.0f64, |acc, row| acc.max(row[var].abs()));
        if max_abs > 1e-12 {
            *scale = max_abs;
        }
    }
    for row in scaled_rows.iter_mut() {
        for (v, s) in row.iter_mut().zip(&col_scale) {
            *v /= s;
        }
    }
    // Scaled variable x' = s_j x_j keeps c.x invariant with costs c_j / s_j.
    let scaled_costs: Vec<f64> = lp
        .objective
        .iter()
        .zip(&col_scale)
        .map(|(c, s)| c / s)
        .collect();

    // Map scaled variables onto standard-form columns: one column per
    // nonnegative variable, a (plus, minus) pair per free variable.
    let mut col_of_var = Vec::with_capacity(lp.num_vars);
    let mut num_struct = 0usize;
    for &is_free in &lp.free {
        col_of_var.push((num_struct, is_free));
        num_struct += if is_free { 2 } else { 1 };
    }
    let num_slacks = lp.le.len();
    let first_slack = num_struct;
    let first_artificial = num_struct + num_slacks;
    let num_cols = first_artificial + num_rows;

    let expand_row = |row: &[f64], out: &mut Vec<f64>| {
        for (var, &coef) in row.iter().enumerate() {
            let (col, is_free) = col_of_var[var];
            out[col] += coef;
            if is_free {
                out[col + 1] -= coef;
            }
        }
    };

    let mut rows = Vec::with_capacity(num_rows);
    let mut rhs = Vec::with_capacity(num_rows);
    // Sign applied to each row so that rhs >= 0.
    let mut row_sign = Vec::with_capacity(num_rows);
    for (r, (row, &b)) in scaled_rows.iter().zip(&scaled_rhs).enumerate() {
        let mut expanded = vec![0.0; num_cols];
        expand_row(row, &mut expanded);
        if r >= lp.eq.len() {
            expanded[first_slack + (r - lp.eq.len())] = 1.0;
        }
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        if sign < 0.0 {
            for v in expanded.iter_mut() {
                *v = -*v;
            }
        }
        expanded[first_artificial + r] = 1.0;
        rows.push(expanded);
        rhs.push(b.abs());
        row_sign.push(sign);
    }

    let mut costs = vec![0.0; num_cols];
    for (var, &c) in scaled_costs.iter().enumerate() {
        let (col, is_free) = col_of_var[var];
        costs[col] += c;
        if is_free {
            costs[col + 1] -= c;
        }
    }

    // Initial basis: the artificial columns. Reduced costs follow from
    // c_B = 1 on artificials (phase 1) and c_B = 0 everywhere (phase 2).
    let mut obj1 = vec![0.0; num_cols];
    for row in &rows {
        for (j, v) in obj1.iter_mut().enumerate() {
            *v -= row[j];
        }
    }
    for v in obj1.iter_mut().skip(first_artificial) {
        *v = 0.0;
    }

    let rows0 = rows.clone();
    let rhs0 = rhs.clone();
    let mut t = Tableau {
        basis: (0..num_rows).map(|r| first_artificial + r).collect(),
        row_origin: (0..num_rows).collect(),
        rows,
        rhs,
        obj: costs.clone(),
        obj1,
        costs_std: costs,
        first_artificial,
    };

    let max_iterations = 10_000 + 10 * (num_rows + num_cols);
    let mut iterations = 0usize;

    // Phase 1: drive the artificial sum to zero.
    run_phase(&mut t, true, max_iterations, &mut iterations)?;
    if t.phase_value(true) > FEAS_TOL {
        return Err(Error::Infeasible);
    }
    t.evict_artificials();

    // Phase 2: optimize the real objective from the feasible basis.
    run_phase(&mut t, false, max_iterations, &mut iterations)?;

    // The iterations fixed the optimal basis; the returned numbers come from
    // a fresh factorization of that basis against the original data, which
    // discards whatever round-off the pivot chain accumulated.
    let kept = t.basis.len();
    let mut basis_matrix = vec![vec![0.0; kept]; kept];
    let mut basis_rhs = vec![0.0; kept];
    for (i, &orig) in t.row_origin.iter().enumerate() {
        for (k, &bvar) in t.basis.iter().enumerate() {
            basis_matrix[i][k] = rows0[orig][bvar];
        }
        basis_rhs[i] = rhs0[orig];
    }
    let refactor = solve_linear_system(basis_matrix.clone(), basis_rhs);
    let refactor_ok = refactor.is_some();
    let x_basis = refactor.unwrap_or_else(|| t.rhs.clone());

    let mut std_x = vec![0.0; t.first_artificial];
    for (k, &bvar) in t.basis.iter().enumerate() {
        if bvar < t.first_artificial {
            std_x[bvar] = x_basis[k];
        }
    }
    let mut x = vec![0.0; lp.num_vars];
    for (var, &(col, is_free)) in col_of_var.iter().enumerate() {
        let scaled = if is_free {
            std_x[col] - std_x[col + 1]
        } else {
            std_x[col]
        };
        x[var] = scaled / col_scale[var];
    }
    let value: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

    // Duals solve B^T y = c_B over the surviving rows; dropped (redundant)
    // rows keep dual zero. Undo the row signs and equilibration scales.
    let mut transpose = vec![vec![0.0; kept]; kept];
    for i in 0..kept {
        for k in 0..kept {
            transpose[k][i] = basis_matrix[i][k];
        }
    }
    let c_basis: Vec<f64> = t.basis.iter().map(|&b| t.costs_std[b]).collect();
    let y = solve_linear_system(transpose, c_basis).unwrap_or_else(|| vec![0.0; kept]);
    let mut duals = vec![0.0; num_rows];
    for (i, &orig) in t.row_origin.iter().enumerate() {
        duals[orig] = y[i] * row_sign[orig] / row_scale[orig];
    }
    let duals_eq = duals[..lp.eq.len()].to_vec();
    let duals_le = duals[lp.eq.len()..].to_vec();

    let mut max_residual: f64 = 0.0;
    for (row, b) in &lp.eq {
        let lhs: f64 = row.iter().zip(&x).map(|(a, v)| a * v).sum();
        max_residual = max_residual.max((lhs - b).abs());
    }
    for (row, h) in &lp.le {
        let lhs: f64 = row.iter().zip(&x).map(|(a, v)| a * v).sum();
        max_residual = max_residual.max((lhs - h).max(0.0));
    }
    for (var, &v) in x.iter().enumerate() {
        if !lp.free[var] {
            max_residual = max_residual.max((-v).max(0.0));
        }
    }
    if max_residual > 1e-6 {
        let min_basic = x_basis.iter().copied().fold(f64::INFINITY, f64::min);
        let mut worst_eq = 0.0f64;
        for (row, b) in &lp.eq {
            let lhs: f64 = row.iter().zip(&x).map(|(a, v)| a * v).sum();
            worst_eq = worst_eq.max((lhs - b).abs());
        }
        let mut worst_le = 0.0f64;
        for (row, h) in &lp.le {
            let lhs: f64 = row.iter().zip(&x).map(|(a, v)| a * v).sum();
            worst_le = worst_le.max((lhs - h).max(0.0));
        }
        let max_basic = x_basis.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut full_x_std = vec![0.0; num_cols];
        for (k, &bvar) in t.basis.iter().enumerate() {
            full_x_std[bvar] = x_basis[k];
        }
        let mut worst_std = 0.0f64;
        let mut worst_row = usize::MAX;
        for (i, &orig) in t.row_origin.iter().enumerate() {
            let lhs: f64 = rows0[orig].iter().zip(&full_x_std).map(|(a, v)| a * v).sum();
            let r = (lhs - rhs0[orig]).abs();
            if r > worst_std {
                worst_std = r;
                worst_row = i;
            }
        }
        eprintln!(
            "RESID diag: total {max_residual:.3e}, eq {worst_eq:.3e}, le {worst_le:.3e}, \
             min basic {min_basic:.3e}, max basic {max_basic:.3e}, std-row resid {worst_std:.3e} \
             (row {worst_row}), rows kept {kept}/{num_rows}, iters {iterations}, \
             refactor_ok {refactor_ok}, first_artificial {first_artificial}, basis {:?}",
            t.basis
        );
        return Err(Error::Internal(format!(
            "simplex returned a point with residual {max_residual:.3e}"
        )));
    }

    Ok(LpSolution {
        x,
        value,
        duals_eq,
        duals_le,
        max_residual,
        iterations,
    })
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Phase-2 reduced costs, maintained through every pivot.
    obj: Vec<f64>,
    /// Phase-1 reduced costs (artificial sum), maintained alongside.
    obj1: Vec<f64>,
    /// Original standard-form costs, for objective-value tracking.
    costs_std: Vec<f64>,
    first_artificial: usize,
    /// Original row index behind each surviving tableau row.
    row_origin: Vec<usize>,
}

fn run_phase(
    t: &mut Tableau,
    phase1: bool,
    max_iterations: usize,
    iterations: &mut usize,
) -> Result<()> {
    loop {
        if phase1 && t.phase_value(true) <= 1e-12 && t.rhs.iter().all(|&v| v >= 0.0) {
            return Ok(()); // already feasible; no need to price out
        }
        if *iterations >= max_iterations {
            return Err(Error::IterationLimit);
        }
        let Some(entering) = t.choose_entering(phase1) else {
            return Ok(()); // this phase is optimal
        };
        let Some(leaving) = t.choose_leaving(entering) else {
            // No eligible pivot: either a true ray or the incrementally
            // maintained reduced costs drifted. Recompute them from the
            // basis before concluding.
            t.refresh_reduced_costs(phase1);
            let rc = if phase1 {
                t.obj1[entering]
            } else {
                t.obj[entering]
            };
            if rc >= -OPT_TOL {
                continue; // drift artifact; re-price with fresh numbers
            }
            return if phase1 {
                // The artificial sum is bounded below by zero.
                Err(Error::Internal("phase-1 subproblem unbounded".into()))
            } else {
                Err(Error::Unbounded)
            };
        };
        t.pivot(leaving, entering);
        *iterations += 1;
    }
}

impl Tableau {
    fn phase_value(&self, phase1: bool) -> f64 {
        if phase1 {
            self.basis
                .iter()
                .zip(&self.rhs)
                .filter(|(&b, _)| b >= self.first_artificial)
                .map(|(_, &v)| v)
                .sum()
        } else {
            self.basis
                .iter()
                .zip(&self.rhs)
                .map(|(&b, &v)| self.costs_std[b] * v)
                .sum()
        }
    }

    /// Dantzig pricing: most negative reduced cost, lowest index on ties.
    /// Artificial columns never enter; candidates are structural or slack.
    fn choose_entering(&self, phase1: bool) -> Option<usize> {
        let rc = if phase1 { &self.obj1 } else { &self.obj };
        let mut best: Option<(usize, f64)> = None;
        for (j, &c) in rc.iter().enumerate().take(self.first_artificial) {
            if c < -OPT_TOL && best.is_none_or(|(_, bc)| c < bc) {
                best = Some((j, c));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Lexicographic ratio test. Every positive entry joins the minimum —
    /// skipping any would let the pivot push that row's rhs negative. Among
    /// near-minimum-ratio rows, the winner minimizes `(rhs, B^-1 block) / a`
    /// lexicographically; since the rows of `B^-1` are distinct, the choice
    /// is unique, deterministic, and cycle-free.
    fn choose_leaving(&self, entering: usize) -> Option<usize> {
        let mut theta = f64::INFINITY;
        for r in 0..self.rows.len() {
            let a = self.rows[r][entering];
            if a > ZERO_TOL {
                theta = theta.min(self.rhs[r] / a);
            }
        }
        if theta == f64::INFINITY {
            return None;
        }
        let slack = 1e-9 * theta.abs() + 1e-12;
        let mut best: Option<usize> = None;
        for r in 0..self.rows.len() {
            let a = self.rows[r][entering];
            if a > ZERO_TOL && self.rhs[r] / a <= theta + slack {
                best = Some(match best {
                    None => r,
                    Some(b) => self.lex_smaller(r, b, entering),
                });
            }
        }
        best
    }

    /// Which of two candidate rows is lexicographically smaller after
    /// normalization by its pivot element, comparing rhs first and then the
    /// `B^-1` block stored in the artificial columns.
    fn lex_smaller(&self, r1: usize, r2: usize, entering: usize) -> usize {
        let a1 = self.rows[r1][entering];
        let a2 = self.rows[r2][entering];
        let v1 = self.rhs[r1] / a1;
        let v2 = self.rhs[r2] / a2;
        if v1 != v2 {
            return if v1 < v2 { r1 } else { r2 };
        }
        for c in self.first_artificial..self.obj.len() {
            let v1 = self.rows[r1][c] / a1;
            let v2 = self.rows[r2][c] / a2;
            if v1 != v2 {
                return if v1 < v2 { r1 } else { r2 };
            }
        }
        // Identical B^-1 rows cannot happen; fall back to the lower index.
        r1.min(r2)
    }

    /// Recomputes a reduced-cost row from the current tableau:
    /// `rc_j = c_j - sum_r c_B(r) * tableau[r][j]`. Clears the incremental
    /// drift that long degenerate pivot chains accumulate.
    fn refresh_reduced_costs(&mut self, phase1: bool) {
        let num_cols = self.obj.len();
        let is_artificial = |col: usize| col >= self.first_artificial;
        let mut fresh = vec![0.0; num_cols];
        for (j, slot) in fresh.iter_mut().enumerate() {
            *slot = if phase1 {
                if is_artificial(j) {
                    1.0
                } else {
                    0.0
                }
            } else {
                self.costs_std[j]
            };
        }
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = if phase1 {
                if is_artificial(b) {
                    1.0
                } else {
                    0.0
                }
            } else {
                self.costs_std[b]
            };
            if cb != 0.0 {
                for (slot, &a) in fresh.iter_mut().zip(&self.rows[r]) {
                    *slot -= cb * a;
                }
            }
        }
        if phase1 {
            self.obj1 = fresh;
        } else {
            self.obj = fresh;
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let pivot = self.rows[pr][pc];
        let inv = 1.0 / pivot;
        for v in self.rows[pr].iter_mut() {
            *v *= inv;
        }
        self.rhs[pr] *= inv;

        let pivot_row = std::mem::take(&mut self.rows[pr]);
        let pivot_rhs = self.rhs[pr];
        for r in 0..self.rows.len() {
            if r == pr {
                continue;
            }
            let factor = self.rows[r][pc];
            if factor != 0.0 {
                for (v, &p) in self.rows[r].iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                self.rows[r][pc] = 0.0;
                self.rhs[r] -= factor * pivot_rhs;
                // Clamp round-off that would make a basic value negative.
                if self.rhs[r] < 0.0 && self.rhs[r] > -1e-11 {
                    self.rhs[r] = 0.0;
                }
            }
        }
        for obj in [&mut self.obj, &mut self.obj1] {
            let factor = obj[pc];
            if factor != 0.0 {
                for (v, &p) in obj.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                obj[pc] = 0.0;
            }
        }
        self.rows[pr] = pivot_row;
        self.basis[pr] = pc;
    }

    /// After phase 1, pivot surviving basic artificials onto structural
    /// columns, or delete their rows as redundant. Pivots pick the largest
    /// structural entry; rows whose structural part is numerically zero are
    /// redundant (their artificial sits at zero) and get dropped.
    fn evict_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.first_artificial {
                let col = (0..self.first_artificial)
                    .max_by(|&a, &b| self.rows[r][a].abs().total_cmp(&self.rows[r][b].abs()))
                    .filter(|&j| self.rows[r][j].abs() > 1e-7);
                match col {
                    Some(j) => self.pivot(r, j),
                    None => {
                        self.rows.remove(r);
                        self.rhs.remove(r);
                        self.basis.remove(r);
                        self.row_origin.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }
}

/// Gaussian elimination with partial pivoting for small dense systems.
/// Returns `None` when the matrix is numerically singular.
pub(crate) fn solve_linear_system(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = a.len();
    if n == 0 || a.iter().any(|row| row.len() != n) || b.len() != n {
        return None;
    }
    for k in 0..n {
        let (pivot_row, pivot_abs) = (k..n)
            .map(|r| (r, a[r][k].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pivot_abs < 1e-12 {
            return None;
        }
        a.swap(k, pivot_row);
        b.swap(k, pivot_row);
        for r in k + 1..n {
            let factor = a[r][k] / a[k][k];
            if factor != 0.0 {
                for j in k..n {
                    a[r][j] -= factor * a[k][j];
                }
                b[r] -= factor * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in k + 1..n {
            acc -= a[k][j] * x[j];
        }
        x[k] = acc / a[k][k];
    }
    Some(x)
}
