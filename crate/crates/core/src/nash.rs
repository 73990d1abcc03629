//! Nash equilibrium search and certification.
//!
//! Two finders are provided. [`find_nash_random`] runs damped best-response
//! averaging from random simplex points; whenever the recent best-response
//! supports stabilize, it solves the linear indifference system on that
//! support and keeps the result only if its KKT residual certifies it.
//! [`enumerate_pure_nash`] streams over all joint actions and returns every
//! pure profile whose actions are mutual best responses, ties included.
//!
//! No uncertified point ever escapes either finder: everything returned has
//! been re-checked through [`kkt_residual`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{advance_joint_action, Game, Strategy, StrategyProfile};
use crate::lp::solve_linear_system;
use crate::seeding::derive_seed;

/// Default cap on streamed pure-equilibrium enumeration, in joint actions.
pub const DEFAULT_ENUM_CAP: u128 = 1 << 24;

/// Iterations between polish/certification attempts in the random finder.
const POLISH_PERIOD: usize = 20;

/// KKT multipliers for one player: `lambda` on the nonnegativity constraints
/// and `mu` on the normalization constraint.
#[derive(Debug, Clone)]
pub struct KktMultipliers {
    pub lambda: Vec<f64>,
    pub mu: f64,
}

/// A strategy profile together with its KKT certificate.
#[derive(Debug, Clone)]
pub struct NashPoint {
    pub profile: StrategyProfile,
    /// Max over players of the complementarity violation `lambda . x`.
    pub kkt_residual: f64,
    pub is_pure: bool,
    pub multipliers: Vec<KktMultipliers>,
}

/// Distinct certified equilibria, deduplicated in discovery order.
#[derive(Debug, Clone, Default)]
pub struct NashSet {
    points: Vec<NashPoint>,
}

impl NashSet {
    pub fn points(&self) -> &[NashPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<NashPoint> {
        self.points
    }
}

/// Knobs for the random-restart finder.
#[derive(Debug, Clone)]
pub struct NashSearchConfig {
    pub restarts: usize,
    /// Acceptance threshold on the KKT residual.
    pub tol: f64,
    /// Budget of best-response iterations per restart.
    pub max_iterations: usize,
    /// L-infinity distance under which two equilibria merge.
    pub dedupe_tol: f64,
}

impl Default for NashSearchConfig {
    fn default() -> Self {
        NashSearchConfig {
            restarts: 20,
            tol: 1e-6,
            max_iterations: 10_000,
            dedupe_tol: 1e-4,
        }
    }
}

/// Player `i`'s expected cost of each pure action against the opponents'
/// strategies: `g = sum_{j != i} C^{ij} x_j`.
pub fn payoff_vector(game: &Game, i: usize, profile: &StrategyProfile) -> Vec<f64> {
    let m = game.num_actions();
    let mut g = vec![0.0; m];
    let strategies: Vec<&[f64]> = profile.strategies().iter().map(|s| s.probs()).collect();
    payoff_into(game, i, &strategies, &mut g);
    g
}

fn payoff_into(game: &Game, i: usize, strategies: &[&[f64]], g: &mut [f64]) {
    let (n, m) = (game.num_players(), game.num_actions());
    g.fill(0.0);
    for (j, xj) in strategies.iter().enumerate().take(n) {
        if j == i {
            continue;
        }
        let matrix = game.pair_matrix(i, j);
        for (a, slot) in g.iter_mut().enumerate() {
            let row = &matrix[a * m..(a + 1) * m];
            let mut acc = 0.0;
            for (&c, &p) in row.iter().zip(xj.iter()) {
                acc += c * p;
            }
            *slot += acc;
        }
    }
}

/// KKT residual of a profile with closed-form multipliers.
///
/// For each player, `mu = min_a g[a]` and `lambda = g - mu` satisfy
/// stationarity and dual feasibility exactly, so the residual reduces to the
/// complementarity violation `lambda . x`. The max over players is zero
/// exactly when the profile is a Nash equilibrium.
pub fn kkt_residual(game: &Game, profile: &StrategyProfile) -> (f64, Vec<KktMultipliers>) {
    profile
        .check_for(game)
        .expect("profile does not match game");
    let n = game.num_players();
    let mut worst: f64 = 0.0;
    let mut multipliers = Vec::with_capacity(n);
    for i in 0..n {
        let g = payoff_vector(game, i, profile);
        let mu = g.iter().copied().fold(f64::INFINITY, f64::min);
        let lambda: Vec<f64> = g.iter().map(|v| v - mu).collect();
        let violation: f64 = lambda
            .iter()
            .zip(profile.player(i).probs())
            .map(|(l, x)| l * x)
            .sum();
        worst = worst.max(violation);
        multipliers.push(KktMultipliers { lambda, mu });
    }
    (worst, multipliers)
}

fn certified_point(game: &Game, profile: StrategyProfile, tol: f64) -> Option<NashPoint> {
    let (residual, multipliers) = kkt_residual(game, &profile);
    if residual <= tol {
        let is_pure = profile.is_pure();
        Some(NashPoint {
            profile,
            kkt_residual: residual,
            is_pure,
            multipliers,
        })
    } else {
        None
    }
}

/// Random-restart search: damped best-response averaging with step `1/(k+2)`
/// plus a periodic exact solve of the indifference system on the recently
/// played best-response support. Returns all distinct certified points;
/// deterministic given `seed` (restart `r` draws from a derived stream, so
/// results do not depend on scheduling).
pub fn find_nash_random(game: &Game, cfg: &NashSearchConfig, seed: u64) -> Result<NashSet> {
    assert!(cfg.restarts >= 1, "need at least one restart");
    let mut found = Vec::new();
    for restart in 0..cfg.restarts {
        if let Some(point) = run_restart(game, cfg, derive_seed(seed, &[restart as u64])) {
            found.push(point);
        }
    }
    if found.is_empty() {
        return Err(Error::NoEquilibriumFound);
    }
    Ok(dedupe_equilibria(found, cfg.dedupe_tol))
}

/// First certified restart, the uncoordinated baseline of the benchmark.
pub fn find_first_nash(game: &Game, cfg: &NashSearchConfig, seed: u64) -> Result<NashPoint> {
    assert!(cfg.restarts >= 1, "need at least one restart");
    for restart in 0..cfg.restarts {
        if let Some(point) = run_restart(game, cfg, derive_seed(seed, &[restart as u64])) {
            return Ok(point);
        }
    }
    Err(Error::NoEquilibriumFound)
}

fn run_restart(game: &Game, cfg: &NashSearchConfig, seed: u64) -> Option<NashPoint> {
    let (n, m) = (game.num_players(), game.num_actions());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Vec<f64>> = (0..n).map(|_| random_simplex_point(m, &mut rng)).collect();
    let mut recent_br = vec![vec![false; m]; n];
    let mut g = vec![0.0; m];
    let mut brs = vec![0usize; n];

    for k in 0..cfg.max_iterations {
        for i in 0..n {
            let views: Vec<&[f64]> = x.iter().map(|v| v.as_slice()).collect();
            payoff_into(game, i, &views, &mut g);
            let b = argmin(&g);
            brs[i] = b;
            recent_br[i][b] = true;
        }

        if (k + 1) % POLISH_PERIOD == 0 {
            let supports: Vec<Vec<usize>> = recent_br
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter_map(|(a, &hit)| hit.then_some(a))
                        .collect()
                })
                .collect();
            if let Some(point) = polish_supports(game, &supports, cfg.tol) {
                return Some(point);
            }
            if let Some(point) = certify_current(game, &x, cfg.tol) {
                return Some(point);
            }
            for row in recent_br.iter_mut() {
                row.fill(false);
            }
        }

        let alpha = 1.0 / (k as f64 + 2.0);
        for (xi, &b) in x.iter_mut().zip(&brs) {
            for (a, v) in xi.iter_mut().enumerate() {
                *v *= 1.0 - alpha;
                if a == b {
                    *v += alpha;
                }
            }
        }
    }

    let supports: Vec<Vec<usize>> = brs.iter().map(|&b| vec![b]).collect();
    polish_supports(game, &supports, cfg.tol).or_else(|| certify_current(game, &x, cfg.tol))
}

/// Lowest index wins ties, which keeps the iteration deterministic.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = a;
        }
    }
    best
}

fn certify_current(game: &Game, x: &[Vec<f64>], tol: f64) -> Option<NashPoint> {
    let strategies = x
        .iter()
        .map(|xi| {
            let sum: f64 = xi.iter().sum();
            Strategy::new(xi.iter().map(|v| v / sum).collect()).ok()
        })
        .collect::<Option<Vec<_>>>()?;
    let profile = StrategyProfile::new(strategies).ok()?;
    certified_point(game, profile, tol)
}

/// Solves the indifference system on the given supports. For a polymatrix
/// game the system is linear in all strategy entries and multipliers: for
/// every supported action `a` of player `i`,
/// `sum_{j != i} sum_{b in S_j} C^{ij}[a, b] x_j[b] - mu_i = 0`, plus one
/// normalization row per player. Singleton supports reduce to the pure
/// profile. The candidate is kept only if its KKT residual certifies.
fn polish_supports(game: &Game, supports: &[Vec<usize>], tol: f64) -> Option<NashPoint> {
    let (n, m) = (game.num_players(), game.num_actions());
    let mut offset = Vec::with_capacity(n);
    let mut total = 0usize;
    for support in supports {
        if support.is_empty() {
            return None;
        }
        offset.push(total);
        total += support.len();
    }
    let dim = total + n;
    let mut a = vec![vec![0.0; dim]; dim];
    let mut b = vec![0.0; dim];

    let mut row = 0usize;
    for (i, support_i) in supports.iter().enumerate() {
        for &action in support_i {
            for (j, support_j) in supports.iter().enumerate() {
                if j == i {
                    continue;
                }
                let matrix = game.pair_matrix(i, j);
                for (idx, &bact) in support_j.iter().enumerate() {
                    a[row][offset[j] + idx] += matrix[action * m + bact];
                }
            }
            a[row][total + i] = -1.0;
            row += 1;
        }
    }
    for (i, support_i) in supports.iter().enumerate() {
        for idx in 0..support_i.len() {
            a[row][offset[i] + idx] = 1.0;
        }
        b[row] = 1.0;
        row += 1;
    }

    let solution = solve_linear_system(a, b)?;
    let mut strategies = Vec::with_capacity(n);
    for (i, support_i) in supports.iter().enumerate() {
        let mut probs = vec![0.0; m];
        for (idx, &action) in support_i.iter().enumerate() {
            let v = solution[offset[i] + idx];
            if v < -1e-9 {
                return None; // wrong support guess
            }
            probs[action] = v.max(0.0);
        }
        let sum: f64 = probs.iter().sum();
        if sum <= 0.0 {
            return None;
        }
        for p in probs.iter_mut() {
            *p /= sum;
        }
        strategies.push(Strategy::new(probs).ok()?);
    }
    let profile = StrategyProfile::new(strategies).ok()?;
    certified_point(game, profile, tol)
}

fn random_simplex_point(m: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut point: Vec<f64> = (0..m)
        .map(|_| {
            let u: f64 = rng.random();
            -(1.0 - u).ln()
        })
        .collect();
    let sum: f64 = point.iter().sum();
    if sum <= 0.0 {
        return vec![1.0 / m as f64; m];
    }
    for v in point.iter_mut() {
        *v /= sum;
    }
    point
}

/// Streams over all `m^n` joint actions and returns every pure profile where
/// each player's action attains the minimum of its payoff vector against the
/// others (ties count as best responses). Every returned point has a KKT
/// residual of exactly zero.
pub fn enumerate_pure_nash(game: &Game, cap: u128) -> Result<NashSet> {
    let (n, m) = (game.num_players(), game.num_actions());
    let count = game.joint_action_count()?;
    if count > cap {
        return Err(Error::CapExceeded {
            required: count,
            cap,
        });
    }

    let mut points = Vec::new();
    let mut digits = vec![0usize; n];
    let mut g = vec![0.0; m];
    loop {
        let mut is_equilibrium = true;
        'players: for i in 0..n {
            // Same summation order as payoff_vector, so the later
            // kkt_residual certificate is bit-for-bit consistent.
            g.fill(0.0);
            for (j, &aj) in digits.iter().enumerate() {
                if j == i {
                    continue;
                }
                let matrix = game.pair_matrix(i, j);
                for (a, slot) in g.iter_mut().enumerate() {
                    *slot += matrix[a * m + aj];
                }
            }
            let own = g[digits[i]];
            for &alt in g.iter() {
                if alt < own {
                    is_equilibrium = false;
                    break 'players;
                }
            }
        }
        if is_equilibrium {
            let profile = StrategyProfile::pure(m, &digits);
            let (residual, multipliers) = kkt_residual(game, &profile);
            debug_assert_eq!(residual, 0.0);
            points.push(NashPoint {
                profile,
                kkt_residual: residual,
                is_pure: true,
                multipliers,
            });
        }
        if !advance_joint_action(&mut digits, m) {
            break;
        }
    }
    Ok(NashSet { points })
}

/// Greedy deduplication in discovery order: a point is dropped when some
/// already-kept point lies strictly within `tol` in L-infinity distance over
/// all concatenated strategy entries.
pub fn dedupe_equilibria(points: Vec<NashPoint>, tol: f64) -> NashSet {
    let mut kept: Vec<NashPoint> = Vec::new();
    for point in points {
        let duplicate = kept
            .iter()
            .any(|k| k.profile.linf_distance(&point.profile) < tol);
        if !duplicate {
            kept.push(point);
        }
    }
    NashSet { points: kept }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::cost_of_profile;

    const DELTA: f64 = 500.0;
    const RHO: f64 = 5.0;

    fn chicken() -> Game {
        Game::from_cost_fn(2, 2, |_i, _j, a, b| match (a, b) {
            (0, 0) => DELTA,
            (0, 1) => 0.0,
            _ => RHO,
        })
        .unwrap()
    }

    fn queue_game(n: usize) -> Game {
        Game::from_cost_fn(n, 2, |_i, _j, a, b| match (a, b) {
            (0, 0) => DELTA,
            (0, 1) => 0.0,
            _ => RHO,
        })
        .unwrap()
    }

    #[test]
    fn payoff_vector_against_pure_occupy() {
        let game = chicken();
        let profile = StrategyProfile::pure(2, &[0, 0]);
        assert_eq!(payoff_vector(&game, 0, &profile), vec![DELTA, RHO]);
    }

    #[test]
    fn payoff_vector_indifference_point() {
        let game = chicken();
        let q = RHO / DELTA;
        let profile = StrategyProfile::new(vec![
            Strategy::uniform(2),
            Strategy::new(vec![q, 1.0 - q]).unwrap(),
        ])
        .unwrap();
        let g = payoff_vector(&game, 0, &profile);
        assert!((g[0] - RHO).abs() < 1e-12);
        assert!((g[1] - RHO).abs() < 1e-12);
    }

    #[test]
    fn payoff_vector_against_uniform() {
        let game = chicken();
        let profile = StrategyProfile::new(vec![Strategy::uniform(2), Strategy::uniform(2)]).unwrap();
        let g = payoff_vector(&game, 0, &profile);
        assert_eq!(g, vec![250.0, 5.0]);
    }

    #[test]
    fn kkt_residual_on_pure_profiles() {
        let game = chicken();
        let (residual, _) = kkt_residual(&game, &StrategyProfile::pure(2, &[0, 1]));
        assert_eq!(residual, 0.0);

        let (residual, multipliers) = kkt_residual(&game, &StrategyProfile::pure(2, &[0, 0]));
        assert_eq!(residual, DELTA - RHO);
        assert_eq!(multipliers[0].mu, RHO);
    }

    #[test]
    fn kkt_residual_at_mixed_equilibrium() {
        let game = chicken();
        let p = RHO / DELTA;
        let mixed = Strategy::new(vec![p, 1.0 - p]).unwrap();
        let profile = StrategyProfile::new(vec![mixed.clone(), mixed]).unwrap();
        let (residual, _) = kkt_residual(&game, &profile);
        assert!(residual <= 1e-12, "residual {residual}");
    }

    #[test]
    fn residual_equals_unilateral_improvement() {
        // c_i(x) - min_a g_i[a] is algebraically the complementarity term.
        let game = chicken();
        let profile = StrategyProfile::new(vec![
            Strategy::new(vec![0.3, 0.7]).unwrap(),
            Strategy::new(vec![0.6, 0.4]).unwrap(),
        ])
        .unwrap();
        let costs = cost_of_profile(&game, &profile);
        let (residual, _) = kkt_residual(&game, &profile);
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            let g = payoff_vector(&game, i, &profile);
            let best = g.iter().copied().fold(f64::INFINITY, f64::min);
            worst = worst.max(costs[i] - best);
        }
        assert!((worst - residual).abs() <= 1e-10 * (1.0 + residual));
    }

    #[test]
    fn enumerate_chicken_equilibria() {
        let game = chicken();
        let set = enumerate_pure_nash(&game, DEFAULT_ENUM_CAP).unwrap();
        let mut actions: Vec<Vec<usize>> = set
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
        actions.sort();
        assert_eq!(actions, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn enumerate_three_player_queue() {
        // One player occupies, the rest yield: exactly 3 pure equilibria.
        let game = queue_game(3);
        let set = enumerate_pure_nash(&game, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(set.len(), 3);
        for point in set.points() {
            let occupiers = point
                .profile
                .strategies()
                .iter()
                .filter(|s| s.probs()[0] == 1.0)
                .count();
            assert_eq!(occupiers, 1);
            assert_eq!(point.kkt_residual, 0.0);
        }
    }

    #[test]
    fn all_zero_game_everything_is_nash() {
        let game = Game::from_cost_fn(2, 3, |_, _, _, _| 0.0).unwrap();
        let set = enumerate_pure_nash(&game, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(set.len(), 9);
    }

    #[test]
    fn enumeration_cap_refusal() {
        let game = queue_game(3);
        assert!(matches!(
            enumerate_pure_nash(&game, 7),
            Err(Error::CapExceeded { required: 8, cap: 7 })
        ));
    }

    #[test]
    fn random_finder_recovers_both_pure_equilibria() {
        let game = chicken();
        let cfg = NashSearchConfig {
            restarts: 50,
            ..NashSearchConfig::default()
        };
        let set = find_nash_random(&game, &cfg, 11).unwrap();
        let has_pure = |target: &[usize]| {
            set.points().iter().any(|p| {
                p.is_pure
                    && p.profile.linf_distance(&StrategyProfile::pure(2, target)) < 1e-6
            })
        };
        assert!(has_pure(&[0, 1]), "missing (Occupy, Yield)");
        assert!(has_pure(&[1, 0]), "missing (Yield, Occupy)");
        for point in set.points() {
            assert!(point.kkt_residual <= cfg.tol);
        }
    }

    #[test]
    fn dominant_strategy_game_collapses_to_one_point() {
        // Occupying always costs delta, yielding always rho < delta.
        let game = Game::from_cost_fn(2, 2, |_i, _j, a, _b| if a == 0 { DELTA } else { RHO }).unwrap();
        let set = find_nash_random(&game, &NashSearchConfig::default(), 3).unwrap();
        assert_eq!(set.len(), 1);
        let point = &set.points()[0];
        assert!(point.profile.linf_distance(&StrategyProfile::pure(2, &[1, 1])) < 1e-9);
    }

    #[test]
    fn same_seed_same_result() {
        let game = chicken();
        let cfg = NashSearchConfig::default();
        let a = find_nash_random(&game, &cfg, 99).unwrap();
        let b = find_nash_random(&game, &cfg, 99).unwrap();
        assert_eq!(a.len(), b.len());
        for (pa, pb) in a.points().iter().zip(b.points()) {
            assert_eq!(pa.profile, pb.profile);
        }
    }

    #[test]
    fn dedupe_boundary_keeps_points_at_exact_tolerance() {
        let game = chicken();
        let make = |p: f64| {
            let profile = StrategyProfile::new(vec![
                Strategy::new(vec![p, 1.0 - p]).unwrap(),
                Strategy::uniform(2),
            ])
            .unwrap();
            let (kkt, multipliers) = kkt_residual(&game, &profile);
            NashPoint {
                profile,
                kkt_residual: kkt,
                is_pure: false,
                multipliers,
            }
        };
        let tol = 0.125; // exactly representable, so the distance is exact
        let deduped = dedupe_equilibria(vec![make(0.5), make(0.5 + tol)], tol);
        assert_eq!(deduped.len(), 2);
        let deduped = dedupe_equilibria(vec![make(0.5), make(0.5)], tol);
        assert_eq!(deduped.len(), 1);
    }
}
