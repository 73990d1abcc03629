//! Correlated equilibria and their reduced-rank hull approximation.
//!
//! [`solve_ce_optimal`] assembles the rationality constraints over all `m^n`
//! joint actions and minimizes an [`Objective`] with the in-house simplex —
//! tractable only below the dense cap, which mirrors the memory wall that
//! direct CE computation hits as games grow.
//!
//! [`solve_rrce`] instead optimizes mixture weights over the convex hull of
//! pre-computed Nash points. Each hull vertex is a rank-1 product
//! distribution, so the cost map needs only the `d` per-equilibrium cost
//! vectors (`O(d n^2 m^2)` work) and the weight program has `d + n`
//! variables regardless of `m^n`. The hull is contained in the CE set, so
//! every mixture returned is itself a correlated equilibrium.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    advance_joint_action, cost_of_profile, DenseDistribution, Game, JointDistribution,
    MixtureDistribution,
};
use crate::lp::{simplex_solve, LinearProgram};
use crate::nash::NashSet;

/// Default cap on dense CE assembly, in joint actions.
pub const DEFAULT_CE_CAP: u128 = 1 << 12;

/// Default fairness threshold, in minutes: one yield penalty.
pub const DEFAULT_FAIRNESS_DELTA: f64 = 5.0;

/// Scalarization of the per-player cost vector that the coordinator
/// minimizes over the equilibrium set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Objective {
    /// Fairness-threshold criterion with maximin fairness:
    /// `J(c) = -n*delta + sum_i max(c_i + delta, max_j c_j)`.
    ///
    /// Within the threshold (all pairwise cost gaps at most `delta`) this
    /// reduces to the total cost; once one player trails by more than
    /// `delta`, the worst-off player dominates.
    FairnessThreshold { delta: f64 },
    /// `J(c) = sum_i c_i`.
    SumOfCosts,
    /// `J(c) = weights . c`.
    Custom { weights: Vec<f64> },
}

impl Objective {
    /// Direct evaluation of `J` on a cost vector.
    pub fn evaluate(&self, costs: &[f64]) -> f64 {
        match self {
            Objective::FairnessThreshold { delta } => {
                let n = costs.len() as f64;
                let cmax = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let total: f64 = costs.iter().map(|c| (c + delta).max(cmax)).sum();
                -n * delta + total
            }
            Objective::SumOfCosts => costs.iter().sum(),
            Objective::Custom { weights } => {
                assert_eq!(weights.len(), costs.len(), "weight/cost length mismatch");
                weights.iter().zip(costs).map(|(w, c)| w * c).sum()
            }
        }
    }

    /// Auxiliary LP variables needed by [`encode_objective`].
    pub fn aux_vars(&self, num_players: usize) -> usize {
        match self {
            Objective::FairnessThreshold { .. } => num_players,
            _ => 0,
        }
    }

    pub fn validate(&self, num_players: usize) -> Result<()> {
        match self {
            Objective::FairnessThreshold { delta } => {
                if !delta.is_finite() || *delta < 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "fairness threshold must be finite and nonnegative, got {delta}"
                    )));
                }
            }
            Objective::Custom { weights } => {
                if weights.len() != num_players {
                    return Err(Error::InvalidConfig(format!(
                        "custom objective has {} weights for {num_players} players",
                        weights.len()
                    )));
                }
            }
            Objective::SumOfCosts => {}
        }
        Ok(())
    }
}

/// One rationality row of the CE system: recommending `recommended` to
/// `player` must not pay worse than deviating to `deviation`. Entries are
/// `(flat joint-action column, coefficient)` pairs; the row applies as
/// `row . z <= 0`.
#[derive(Debug, Clone)]
pub struct CeRow {
    pub player: usize,
    pub recommended: usize,
    pub deviation: usize,
    pub entries: Vec<(usize, f64)>,
}

/// The `n*m*(m-1)` rationality rows plus the implicit normalization row,
/// with columns indexed by flat joint action.
#[derive(Debug, Clone)]
pub struct CeConstraintSystem {
    num_players: usize,
    num_actions: usize,
    joint_actions: usize,
    rows: Vec<CeRow>,
}

impl CeConstraintSystem {
    pub fn rows(&self) -> &[CeRow] {
        &self.rows
    }

    pub fn joint_actions(&self) -> usize {
        self.joint_actions
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Rationality rows plus the normalization row.
    pub fn constraint_count(&self) -> usize {
        self.rows.len() + 1
    }

    /// Max violation `row . z` over all rationality rows.
    pub fn max_violation(&self, probs: &[f64]) -> f64 {
        assert_eq!(probs.len(), self.joint_actions);
        self.rows
            .iter()
            .map(|row| {
                row.entries
                    .iter()
                    .map(|&(col, coef)| coef * probs[col])
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Assembles the CE rationality rows for `game`.
///
/// The row for `(i, a*, a')` has nonzeros exactly on columns whose joint
/// action recommends `a*` to player `i`, with coefficient
/// `sum_{j != i} (C^{ij}[a*, a_j] - C^{ij}[a', a_j])` — the expected saving
/// of the deviation while the opponents keep their recommendations.
///
/// Refuses with [`Error::CapExceeded`] above `cap` joint actions, mirroring
/// the memory failure of direct CE computation on large games.
pub fn assemble_ce_constraints(game: &Game, cap: u128) -> Result<CeConstraintSystem> {
    let (n, m) = (game.num_players(), game.num_actions());
    let count = game.joint_action_count()?;
    if count > cap {
        return Err(Error::CapExceeded {
            required: count,
            cap,
        });
    }
    let count = usize::try_from(count).map_err(|_| Error::Overflow("m^n"))?;

    // The rows span the joint-action space; register with the dense guard.
    crate::game::record_dense_allocation();

    let mut rows = Vec::with_capacity(n * m * (m - 1));
    for player in 0..n {
        for recommended in 0..m {
            for deviation in 0..m {
                if deviation == recommended {
                    continue;
                }
                let mut entries = Vec::with_capacity(count / m);
                let mut digits = vec![0usize; n];
                for col in 0..count {
                    if digits[player] == recommended {
                        let mut coef = 0.0;
                        for (j, &aj) in digits.iter().enumerate() {
                            if j != player {
                                coef += game.cost(player, j, recommended, aj)
                                    - game.cost(player, j, deviation, aj);
                            }
                        }
                        entries.push((col, coef));
                    }
                    advance_joint_action(&mut digits, m);
                }
                rows.push(CeRow {
                    player,
                    recommended,
                    deviation,
                    entries,
                });
            }
        }
    }
    Ok(CeConstraintSystem {
        num_players: n,
        num_actions: m,
        joint_actions: count,
        rows,
    })
}

/// Max rationality violation of `z`; at most `0` (up to round-off) exactly
/// when `z` is a correlated equilibrium. Mixtures are densified for
/// verification only, subject to `cap`.
pub fn verify_ce(game: &Game, z: &JointDistribution, cap: u128) -> Result<f64> {
    let system = assemble_ce_constraints(game, cap)?;
    let dense = z.densify(cap)?;
    Ok(system.max_violation(dense.probs()))
}

/// Encodes `J` over an LP whose decision variables determine the cost vector
/// linearly: `c_i = cost_rows[i] . v`.
///
/// For the fairness threshold, auxiliaries `t_i` (already present in `lp` as
/// free variables at `aux_offset..aux_offset + n`) receive objective weight 1
/// and the rows `t_i >= c_i + delta` and `t_i >= c_j`; at the optimum
/// `t_i = max(c_i + delta, c_max)`. Returns the constant to add to the LP
/// value so it equals `J`.
pub fn encode_objective(
    objective: &Objective,
    cost_rows: &[Vec<f64>],
    aux_offset: usize,
    lp: &mut LinearProgram,
) -> f64 {
    let n = cost_rows.len();
    match objective {
        Objective::FairnessThreshold { delta } => {
            let width = lp.num_vars();
            for i in 0..n {
                lp.objective_coeff(aux_offset + i, 1.0);
                // c_i - t_i <= -delta
                let mut row = vec![0.0; width];
                row[..cost_rows[i].len()].copy_from_slice(&cost_rows[i]);
                row[aux_offset + i] = -1.0;
                lp.add_le(row, -delta);
                // c_j - t_i <= 0 for every j
                for cost_row in cost_rows {
                    let mut row = vec![0.0; width];
                    row[..cost_row.len()].copy_from_slice(cost_row);
                    row[aux_offset + i] = -1.0;
                    lp.add_le(row, 0.0);
                }
            }
            -(n as f64) * delta
        }
        Objective::SumOfCosts => {
            for cost_row in cost_rows {
                for (var, &coef) in cost_row.iter().enumerate() {
                    if coef != 0.0 {
                        lp.add_objective_coeff(var, coef);
                    }
                }
            }
            0.0
        }
        Objective::Custom { weights } => {
            for (cost_row, &w) in cost_rows.iter().zip(weights) {
                for (var, &coef) in cost_row.iter().enumerate() {
                    if w * coef != 0.0 {
                        lp.add_objective_coeff(var, w * coef);
                    }
                }
            }
            0.0
        }
    }
}

/// An optimal correlated equilibrium and its certificate.
#[derive(Debug, Clone)]
pub struct CeSolution {
    /// Dense optimal distribution.
    pub z: JointDistribution,
    /// Objective value `J(z)`.
    pub j: f64,
    /// Per-player expected costs at `z`.
    pub costs: Vec<f64>,
    /// Re-verified max rationality violation.
    pub violation: f64,
    /// Time spent inside the simplex solver, seconds.
    pub solver_time_s: f64,
}

/// Minimizes `objective` over the full CE polytope (Eq.-15-style program).
pub fn solve_ce_optimal(game: &Game, objective: &Objective, cap: u128) -> Result<CeSolution> {
    let n = game.num_players();
    objective.validate(n)?;
    let system = assemble_ce_constraints(game, cap)?;
    let width = system.joint_actions;
    let aux = objective.aux_vars(n);
    let total_vars = width + aux;

    let mut lp = LinearProgram::new(total_vars);
    for t in width..total_vars {
        lp.set_free(t);
    }
    // Rationality rows: row . z <= 0.
    for row in &system.rows {
        let mut dense = vec![0.0; total_vars];
        for &(col, coef) in &row.entries {
            dense[col] = coef;
        }
        lp.add_le(dense, 0.0);
    }
    // Normalization.
    let mut norm = vec![0.0; total_vars];
    for slot in norm.iter_mut().take(width) {
        *slot = 1.0;
    }
    lp.add_eq(norm, 1.0);

    let cost_rows = per_column_costs(game, &system, total_vars);
    let offset = encode_objective(objective, &cost_rows, width, &mut lp);

    let started = Instant::now();
    let solution = match simplex_solve(&lp) {
        Ok(s) => s,
        Err(Error::Infeasible) => {
            return Err(Error::Internal(
                "CE program reported infeasible, but the CE set contains every Nash \
                 equilibrium and cannot be empty"
                    .into(),
            ));
        }
        Err(e) => return Err(e),
    };
    let solver_time_s = started.elapsed().as_secs_f64();

    let probs = clamp_simplex_point(&solution.x[..width])?;
    let costs: Vec<f64> = cost_rows
        .iter()
        .map(|row| row.iter().zip(&probs).map(|(c, p)| c * p).sum())
        .collect();
    let violation = system.max_violation(&probs);
    let dense = DenseDistribution::new(n, game.num_actions(), probs)?;
    Ok(CeSolution {
        z: JointDistribution::Dense(dense),
        j: solution.value + offset,
        costs,
        violation,
        solver_time_s,
    })
}

/// An optimal reduced-rank correlated equilibrium: mixture weights over a
/// set of Nash points.
#[derive(Debug, Clone)]
pub struct RrceSolution {
    /// Optimal hull weights `gamma`.
    pub gamma: Vec<f64>,
    /// The mixture distribution, kept in rank-1 form.
    pub z: JointDistribution,
    /// Objective value `J` at the mixture.
    pub j: f64,
    /// Per-player expected costs at the mixture.
    pub costs: Vec<f64>,
    /// Time spent inside the simplex solver, seconds (zero for the
    /// degenerate one-point hull).
    pub solver_time_s: f64,
}

/// Minimizes `objective` over the convex hull of `nash` (Eq.-16-style
/// program). Precomputes one cost vector per equilibrium and never touches
/// the joint-action tensor.
pub fn solve_rrce(game: &Game, nash: &NashSet, objective: &Objective) -> Result<RrceSolution> {
    let n = game.num_players();
    objective.validate(n)?;
    if nash.is_empty() {
        return Err(Error::EmptyNashSet);
    }
    let points: Vec<_> = nash.points().iter().map(|p| p.profile.clone()).collect();
    let point_costs: Vec<Vec<f64>> = points.iter().map(|p| cost_of_profile(game, p)).collect();
    let d = points.len();

    if d == 1 {
        let costs = point_costs.into_iter().next().expect("one point");
        let j = objective.evaluate(&costs);
        let z = JointDistribution::Rank1Mixture(MixtureDistribution::new(points, vec![1.0])?);
        return Ok(RrceSolution {
            gamma: vec![1.0],
            z,
            j,
            costs,
            solver_time_s: 0.0,
        });
    }

    let aux = objective.aux_vars(n);
    let total_vars = d + aux;
    let mut lp = LinearProgram::new(total_vars);
    for t in d..total_vars {
        lp.set_free(t);
    }
    let mut norm = vec![0.0; total_vars];
    for slot in norm.iter_mut().take(d) {
        *slot = 1.0;
    }
    lp.add_eq(norm, 1.0);

    // c_i(gamma) = sum_k gamma_k c^k_i.
    let cost_rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; total_vars];
            for (k, ck) in point_costs.iter().enumerate() {
                row[k] = ck[i];
            }
            row
        })
        .collect();
    let offset = encode_objective(objective, &cost_rows, d, &mut lp);

    let started = Instant::now();
    let solution = simplex_solve(&lp)?;
    let solver_time_s = started.elapsed().as_secs_f64();

    let gamma = clamp_simplex_point(&solution.x[..d])?;
    let costs: Vec<f64> = (0..n)
        .map(|i| {
            gamma
                .iter()
                .zip(&point_costs)
                .map(|(g, ck)| g * ck[i])
                .sum()
        })
        .collect();
    let z = JointDistribution::Rank1Mixture(MixtureDistribution::new(points, gamma.clone())?);
    Ok(RrceSolution {
        gamma,
        z,
        j: solution.value + offset,
        costs,
        solver_time_s,
    })
}

/// Linear-equation counts for Nash and CE computation via an interior-point
/// method: `n(m+1)` and `2 m^n + 3 m^2 n + 1`, in exact integer arithmetic.
pub fn problem_size_report(n: u32, m: u32) -> Result<(u128, u128)> {
    let n = n as u128;
    let m = m as u128;
    let nash = n.checked_mul(m + 1).ok_or(Error::Overflow("n(m+1)"))?;
    let pow = m
        .checked_pow(u32::try_from(n).map_err(|_| Error::Overflow("m^n"))?)
        .ok_or(Error::Overflow("m^n"))?;
    let ce = pow
        .checked_mul(2)
        .and_then(|v| v.checked_add(3 * m * m * n))
        .and_then(|v| v.checked_add(1))
        .ok_or(Error::Overflow("2m^n + 3m^2n + 1"))?;
    Ok((nash, ce))
}

/// Per-player cost coefficients over the `m^n` z-columns, padded to
/// `total_vars`: entry `[i][col]` is `sum_{j != i} C^{ij}[a_i, a_j]` for the
/// joint action at `col`.
fn per_column_costs(game: &Game, system: &CeConstraintSystem, total_vars: usize) -> Vec<Vec<f64>> {
    let (n, m) = (system.num_players, system.num_actions);
    let mut rows = vec![vec![0.0; total_vars]; n];
    let mut digits = vec![0usize; n];
    for col in 0..system.joint_actions {
        for (i, row) in rows.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &aj) in digits.iter().enumerate() {
                if j != i {
                    acc += game.cost(i, j, digits[i], aj);
                }
            }
            row[col] = acc;
        }
        advance_joint_action(&mut digits, m);
    }
    rows
}

/// Clamps simplex round-off on a probability block and renormalizes.
/// Entries below `-1e-9` indicate a solver failure rather than round-off.
fn clamp_simplex_point(x: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(x.len());
    for &v in x {
        if v < -1e-9 {
            return Err(Error::Internal(format!(
                "optimal point has negative probability {v:.3e}"
            )));
        }
        out.push(v.max(0.0));
    }
    let sum: f64 = out.iter().sum();
    if sum <= 0.0 {
        return Err(Error::Internal("optimal point sums to zero".into()));
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
    Ok(out)
}
