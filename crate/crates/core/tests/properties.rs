//! Property tests for the solver invariants: mixture-cost linearity,
//! rank-1 product form, encoding bijectivity, pure-equilibrium oracle
//! equivalence, simplex optimality against vertex enumeration, LP duality,
//! hull containment, and the RRCE/CE approximation ordering.
//!
//! Games are generated with small integer costs so that independent
//! summation orders produce bit-identical values and best-response ties
//! stay exact.

use proptest::prelude::*;

use polymatrix::ce::{
    assemble_ce_constraints, encode_objective, solve_ce_optimal, solve_rrce, verify_ce, Objective,
    DEFAULT_CE_CAP,
};
use polymatrix::game::{
    cost_of_distribution, encode_joint_action, profile_to_distribution, Game, JointAction,
    JointDistribution, MixtureDistribution, Strategy as GameStrategy, StrategyProfile,
    DEFAULT_DENSE_CAP,
};
use polymatrix::lp::{simplex_solve, LinearProgram};
use polymatrix::nash::{
    dedupe_equilibria, enumerate_pure_nash, find_nash_random, kkt_residual, payoff_vector,
    NashSearchConfig, DEFAULT_ENUM_CAP,
};

// ---------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------

fn small_game() -> impl Strategy<Value = Game> {
    (2usize..=3, 2usize..=3).prop_flat_map(|(n, m)| {
        let entries = n * (n - 1) * m * m;
        proptest::collection::vec(-5i32..=5, entries).prop_map(move |values| {
            let mut it = values.into_iter();
            Game::from_cost_fn(n, m, |_, _, _, _| f64::from(it.next().unwrap())).unwrap()
        })
    })
}

fn simplex_point(m: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(1u32..=100, m).prop_map(|weights| {
        let total: u32 = weights.iter().sum();
        weights
            .iter()
            .map(|&w| f64::from(w) / f64::from(total))
            .collect()
    })
}

fn profile_for(n: usize, m: usize) -> impl Strategy<Value = StrategyProfile> {
    proptest::collection::vec(simplex_point(m), n).prop_map(|points| {
        StrategyProfile::new(
            points
                .into_iter()
                .map(|p| GameStrategy::new(p).unwrap())
                .collect(),
        )
        .unwrap()
    })
}

fn game_and_mixture() -> impl Strategy<Value = (Game, MixtureDistribution)> {
    small_game().prop_flat_map(|game| {
        let (n, m) = (game.num_players(), game.num_actions());
        (1usize..=4).prop_flat_map(move |d| {
            let game = game.clone();
            (
                proptest::collection::vec(profile_for(n, m), d),
                simplex_point(d),
            )
                .prop_map(move |(points, weights)| {
                    (
                        game.clone(),
                        MixtureDistribution::new(points, weights).unwrap(),
                    )
                })
        })
    })
}

// ---------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------

/// Double-loop best-response check, summing opponents in reverse order.
fn oracle_pure_nash(game: &Game) -> Vec<Vec<usize>> {
    let (n, m) = (game.num_players(), game.num_actions());
    let total = m.pow(n as u32);
    let mut found = Vec::new();
    for flat in 0..total {
        let mut actions = vec![0usize; n];
        let mut rest = flat;
        for slot in actions.iter_mut().rev() {
            *slot = rest % m;
            rest /= m;
        }
        let mut is_nash = true;
        'outer: for i in 0..n {
            let own = oracle_pure_cost(game, i, &actions, actions[i]);
            for alt in 0..m {
                if oracle_pure_cost(game, i, &actions, alt) < own {
                    is_nash = false;
                    break 'outer;
                }
            }
        }
        if is_nash {
            found.push(actions);
        }
    }
    found
}

fn oracle_pure_cost(game: &Game, i: usize, actions: &[usize], own: usize) -> f64 {
    let mut cost = 0.0;
    for j in (0..game.num_players()).rev() {
        if j != i {
            cost += game.cost(i, j, own, actions[j]);
        }
    }
    cost
}

/// Local Gaussian elimination, independent of the library's solver.
fn oracle_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let pivot = (k..n).max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs()))?;
        if a[pivot][k].abs() < 1e-9 {
            return None;
        }
        a.swap(k, pivot);
        b.swap(k, pivot);
        for r in k + 1..n {
            let f = a[r][k] / a[k][k];
            for c in k..n {
                a[r][c] -= f * a[k][c];
            }
            b[r] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for c in k + 1..n {
            acc -= a[k][c] * x[c];
        }
        x[k] = acc / a[k][k];
    }
    Some(x)
}

/// Brute-force vertex enumeration for `min c.x, G x <= h, x >= 0`.
fn oracle_lp_min(c: &[f64], g: &[Vec<f64>], h: &[f64]) -> Option<f64> {
    let n = c.len();
    let k = g.len();
    let mut best: Option<f64> = None;
    // Choose n active constraints among k rows + n bounds.
    let total = k + n;
    let mut choice: Vec<usize> = (0..n).collect();
    loop {
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for &idx in &choice {
            if idx < k {
                a.push(g[idx].clone());
                b.push(h[idx]);
            } else {
                let mut row = vec![0.0; n];
                row[idx - k] = 1.0;
                a.push(row);
                b.push(0.0);
            }
        }
        if let Some(x) = oracle_solve(a, b) {
            let feasible = x.iter().all(|&v| v >= -1e-9)
                && g
                    .iter()
                    .zip(h)
                    .all(|(row, &rhs)| row.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() <= rhs + 1e-9);
            if feasible {
                let value: f64 = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
                best = Some(best.map_or(value, |b: f64| b.min(value)));
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if choice[i] < total - (n - i) {
                choice[i] += 1;
                for j in i + 1..n {
                    choice[j] = choice[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Largest singular value via Jacobi iteration on `A^T A`, plus an upper
/// bound on the second singular value from the Frobenius norm of the second
/// compound matrix: `|wedge^2 A|_F^2 = sum_{i<j} s_i^2 s_j^2 >= s1^2 s2^2`,
/// so `s2 <= |wedge^2 A|_F / s1`. The bound resolves far below the sqrt(eps)
/// floor of eigenvalue-based estimates.
fn top_two_singular_values(matrix: &[Vec<f64>]) -> (f64, f64) {
    let m = matrix.len();

    let mut wedge_sq = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            for k in 0..m {
                for l in k + 1..m {
                    let minor = matrix[i][k] * matrix[j][l] - matrix[i][l] * matrix[j][k];
                    wedge_sq += minor * minor;
                }
            }
        }
    }

    let mut ata = vec![vec![0.0; m]; m];
    for (i, row_i) in ata.iter_mut().enumerate() {
        for j in 0..m {
            row_i[j] = (0..m).map(|k| matrix[k][i] * matrix[k][j]).sum();
        }
    }
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..m {
            for q in p + 1..m {
                off += ata[p][q].abs();
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if ata[p][q].abs() < 1e-300 {
                    continue;
                }
                // Classical symmetric Jacobi rotation zeroing ata[p][q].
                let tau = (ata[q][q] - ata[p][p]) / (2.0 * ata[p][q]);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (apk, aqk) = (ata[p][k], ata[q][k]);
                    ata[p][k] = c * apk - s * aqk;
                    ata[q][k] = s * apk + c * aqk;
                }
                for k in 0..m {
                    let (akp, akq) = (ata[k][p], ata[k][q]);
                    ata[k][p] = c * akp - s * akq;
                    ata[k][q] = s * akp + c * akq;
                }
            }
        }
    }
    let mut eigen: Vec<f64> = (0..m).map(|i| ata[i][i].max(0.0)).collect();
    eigen.sort_by(|a, b| b.total_cmp(a));
    let s1 = eigen[0].sqrt();
    let s2_bound = if s1 > 0.0 { wedge_sq.sqrt() / s1 } else { 0.0 };
    (s1, s2_bound)
}

// ---------------------------------------------------------------------
// Properties
// ---------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Mixture costs computed by linearity match the densified tensor.
    #[test]
    fn mixture_cost_linearity((game, mixture) in game_and_mixture()) {
        let rank1 = JointDistribution::Rank1Mixture(mixture);
        let direct = cost_of_distribution(&game, &rank1);
        let dense = JointDistribution::Dense(rank1.densify(DEFAULT_DENSE_CAP).unwrap());
        let via_tensor = cost_of_distribution(&game, &dense);
        for (a, b) in direct.iter().zip(&via_tensor) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    /// Product distributions of two-player profiles are numerically rank 1.
    #[test]
    fn product_distribution_is_rank_one(
        m in 2usize..=3,
        seeds in proptest::collection::vec(1u32..=100, 6),
    ) {
        let game = Game::from_cost_fn(2, m, |_, _, _, _| 0.0).unwrap();
        let to_simplex = |chunk: &[u32]| {
            let total: u32 = chunk.iter().take(m).sum();
            GameStrategy::new(chunk.iter().take(m).map(|&w| f64::from(w) / f64::from(total)).collect())
                .unwrap()
        };
        let profile = StrategyProfile::new(vec![to_simplex(&seeds[..3]), to_simplex(&seeds[3..])])
            .unwrap();
        let z = profile_to_distribution(&game, &profile, DEFAULT_DENSE_CAP).unwrap();
        let JointDistribution::Dense(dense) = z else { unreachable!() };
        let unfolding: Vec<Vec<f64>> = (0..m)
            .map(|a| dense.probs()[a * m..(a + 1) * m].to_vec())
            .collect();
        let (s1, s2) = top_two_singular_values(&unfolding);
        prop_assert!(s2 <= 1e-9 * s1, "sigma2 = {s2}, sigma1 = {s1}");
    }

    /// enumerate_pure_nash agrees exactly with the double-loop oracle.
    #[test]
    fn pure_nash_matches_oracle(game in small_game()) {
        let set = enumerate_pure_nash(&game, DEFAULT_ENUM_CAP).unwrap();
        let ours: Vec<Vec<usize>> = set
            .points()
            .iter()
            .map(|p| {
                p.profile
                    .strategies()
                    .iter()
                    .map(|s| s.probs().iter().position(|&v| v == 1.0).unwrap())
                    .collect()
            })
            .collect();
        let oracle = oracle_pure_nash(&game);
        prop_assert_eq!(ours, oracle);
    }

    /// Certified points satisfy the unilateral-deviation bound.
    #[test]
    fn certified_points_are_epsilon_nash(game in small_game(), seed in 0u64..1000) {
        let cfg = NashSearchConfig { restarts: 5, ..NashSearchConfig::default() };
        let Ok(set) = find_nash_random(&game, &cfg, seed) else {
            return Ok(()); // no restart certified; nothing to check
        };
        let scale = game.max_abs_cost();
        prop_assume!(scale > 0.0);
        for point in set.points() {
            let costs = polymatrix::game::cost_of_profile(&game, &point.profile);
            for i in 0..game.num_players() {
                let g = payoff_vector(&game, i, &point.profile);
                let best = g.iter().copied().fold(f64::INFINITY, f64::min);
                prop_assert!(costs[i] - best <= cfg.tol * scale);
            }
            // And the residual is re-verified by an independent call.
            let (residual, _) = kkt_residual(&game, &point.profile);
            prop_assert!(residual <= cfg.tol);
        }
    }

    /// Positive power-of-two rescaling of one player's matrices leaves the
    /// pure-equilibrium set unchanged (exact in floating point).
    #[test]
    fn pure_nash_scale_invariance(game in small_game(), shift in -2i32..=3, player in 0usize..3) {
        let player = player % game.num_players();
        let factor = 2f64.powi(shift);
        let scaled = Game::from_cost_fn(
            game.num_players(),
            game.num_actions(),
            |i, j, a, b| {
                let c = game.cost(i, j, a, b);
                if i == player { factor * c } else { c }
            },
        )
        .unwrap();
        let base = enumerate_pure_nash(&game, DEFAULT_ENUM_CAP).unwrap();
        let after = enumerate_pure_nash(&scaled, DEFAULT_ENUM_CAP).unwrap();
        prop_assert_eq!(base.len(), after.len());
        for (a, b) in base.points().iter().zip(after.points()) {
            prop_assert_eq!(&a.profile, &b.profile);
        }
    }

    /// Simplex optimum matches brute-force vertex enumeration.
    #[test]
    fn simplex_matches_vertex_oracle(
        num_vars in 2usize..=4,
        rows in proptest::collection::vec(proptest::collection::vec(-3i32..=3, 4), 1..=4),
        rhs in proptest::collection::vec(0i32..=5, 4),
        costs in proptest::collection::vec(-5i32..=5, 4),
    ) {
        let g: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| row.iter().take(num_vars).map(|&v| f64::from(v)).collect())
            .chain(std::iter::once(vec![1.0; num_vars])) // sum x <= 10 bounds it
            .collect();
        let h: Vec<f64> = rhs
            .iter()
            .take(rows.len())
            .map(|&v| f64::from(v))
            .chain(std::iter::once(10.0))
            .collect();
        let c: Vec<f64> = costs.iter().take(num_vars).map(|&v| f64::from(v)).collect();

        let mut lp = LinearProgram::new(num_vars);
        lp.set_objective(c.clone());
        for (row, &b) in g.iter().zip(&h) {
            lp.add_le(row.clone(), b);
        }
        let solution = simplex_solve(&lp).unwrap(); // x = 0 is feasible
        let oracle = oracle_lp_min(&c, &g, &h).unwrap();
        prop_assert!((solution.value - oracle).abs() <= 1e-7,
            "simplex {} vs oracle {oracle}", solution.value);

        // Strong duality and complementary slackness at the optimum.
        let dual_value: f64 = solution.duals_le.iter().zip(&h).map(|(y, b)| y * b).sum();
        prop_assert!((solution.value - dual_value).abs() <= 1e-7);
        for (row, (&b, &y)) in g.iter().zip(h.iter().zip(&solution.duals_le)) {
            let slack = b - row.iter().zip(&solution.x).map(|(a, v)| a * v).sum::<f64>();
            prop_assert!((y * slack).abs() <= 1e-7);
        }
    }

    /// Encoded fairness LP equals direct evaluation on random cost vectors.
    #[test]
    fn objective_encoding_equivalence(
        costs in proptest::collection::vec(0u32..=2000, 2..=5),
        delta_tenths in 0u32..=100,
    ) {
        let costs: Vec<f64> = costs.iter().map(|&v| f64::from(v) / 10.0).collect();
        let delta = f64::from(delta_tenths) / 10.0;
        let objective = Objective::FairnessThreshold { delta };
        let n = costs.len();
        let mut lp = LinearProgram::new(2 * n);
        for i in 0..2 * n {
            lp.set_free(i);
        }
        let mut cost_rows = Vec::new();
        for (i, &c) in costs.iter().enumerate() {
            let mut row = vec![0.0; 2 * n];
            row[i] = 1.0;
            lp.add_eq(row.clone(), c);
            cost_rows.push(row);
        }
        let offset = encode_objective(&objective, &cost_rows, n, &mut lp);
        let solution = simplex_solve(&lp).unwrap();
        let direct = objective.evaluate(&costs);
        prop_assert!((solution.value + offset - direct).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Convex combinations of certified equilibria stay inside the CE set.
    #[test]
    fn hull_containment(game in small_game(), seed in 0u64..500, d in 1usize..=3) {
        let mut points = enumerate_pure_nash(&game, DEFAULT_ENUM_CAP).unwrap().into_points();
        let cfg = NashSearchConfig { restarts: 4, tol: 1e-10, ..NashSearchConfig::default() };
        if let Ok(found) = find_nash_random(&game, &cfg, seed) {
            points.extend(found.into_points());
        }
        let set = dedupe_equilibria(points, 1e-4);
        prop_assume!(!set.is_empty());

        let take = d.min(set.len());
        let weights: Vec<f64> = (0..take).map(|k| (k + 1) as f64).collect();
        let total: f64 = weights.iter().sum();
        let mixture = MixtureDistribution::new(
            set.points().iter().take(take).map(|p| p.profile.clone()).collect(),
            weights.iter().map(|w| w / total).collect(),
        )
        .unwrap();
        let violation =
            verify_ce(&game, &JointDistribution::Rank1Mixture(mixture), DEFAULT_CE_CAP).unwrap();
        prop_assert!(violation <= 1e-8, "violation {violation}");
    }

    /// RRCE optimizes over a subset of the CE polytope.
    #[test]
    fn rrce_never_beats_ce(game in small_game(), delta_idx in 0usize..3) {
        let delta = [0.0, 1.0, 5.0][delta_idx];
        let nash = enumerate_pure_nash(&game, DEFAULT_ENUM_CAP).unwrap();
        prop_assume!(!nash.is_empty());
        let objective = Objective::FairnessThreshold { delta };
        let ce = solve_ce_optimal(&game, &objective, DEFAULT_CE_CAP).unwrap();
        let rrce = solve_rrce(&game, &nash, &objective).unwrap();
        prop_assert!(rrce.j >= ce.j - 1e-7, "rrce {} vs ce {}", rrce.j, ce.j);
    }

    /// Assembled systems always have n*m*(m-1) + 1 constraints.
    #[test]
    fn ce_constraint_count(game in small_game()) {
        let system = assemble_ce_constraints(&game, DEFAULT_CE_CAP).unwrap();
        let (n, m) = (game.num_players(), game.num_actions());
        prop_assert_eq!(system.rows().len(), n * m * (m - 1));
        prop_assert_eq!(system.constraint_count(), n * m * (m - 1) + 1);
    }
}

/// Mixed-radix encode/decode is a bijection on every grid up to 4096
/// joint actions.
#[test]
fn encoding_bijectivity_exhaustive() {
    for (n, m) in [(2usize, 2usize), (2, 8), (3, 3), (4, 4), (6, 2), (3, 16), (12, 2)] {
        let count = m.pow(n as u32);
        assert!(count <= 4096);
        let mut seen = vec![false; count];
        for flat in 0..count {
            let action = JointAction::from_flat(flat, n, m).unwrap();
            let back = encode_joint_action(action.actions(), m);
            assert_eq!(back, flat, "n = {n}, m = {m}");
            assert!(!seen[back]);
            seen[back] = true;
        }
        assert!(seen.iter().all(|&v| v));
    }
}
