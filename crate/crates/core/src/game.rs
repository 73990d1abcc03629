//! Polymatrix game model: pairwise cost matrices, simplex strategies, joint
//! actions, and joint-action distributions in dense or rank-1 mixture form.
//!
//! A polymatrix game has `n` players with `m` actions each; the cost player
//! `i` pays under joint action `a` decomposes into a sum of pairwise terms
//! `C^{ij}[a_i, a_j]` over opponents `j`. Expected costs of a mixture of
//! product distributions therefore reduce to weighted bilinear forms and
//! never require materializing the `m^n` joint-action tensor.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for probability-vector normalization checks. Chosen to dominate
/// accumulated round-off when summing up to 2^21 tensor entries.
pub const PROB_TOL: f64 = 1e-9;

/// Default cap on dense joint-action tensors, in entries.
pub const DEFAULT_DENSE_CAP: u128 = 1 << 22;

static DENSE_ALLOCATIONS: AtomicU64 = AtomicU64::new(0);

/// Number of joint-action-sized arrays allocated so far, process-wide.
///
/// Scaling tests snapshot this counter around rank-1 code paths to prove
/// they never fall back to an `m^n`-sized representation.
pub fn dense_allocation_count() -> u64 {
    DENSE_ALLOCATIONS.load(Ordering::Relaxed)
}

pub(crate) fn record_dense_allocation() {
    DENSE_ALLOCATIONS.fetch_add(1, Ordering::Relaxed);
}

/// An `n`-player polymatrix game with `m` actions per player and one
/// `m`-by-`m` cost matrix per ordered pair of distinct players.
///
/// Immutable after construction; cheap to share across threads.
///
/// Serialized as `{ "n", "m", "costs": [{ "i", "j", "matrix" }, ...] }` with
/// 0-based player indices and row-major `m`-by-`m` matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameRepr", into = "GameRepr")]
pub struct Game {
    n: usize,
    m: usize,
    /// Slot `i * n + j` holds the row-major cost matrix `C^{ij}` for `i != j`.
    costs: Vec<Vec<f64>>,
}

impl Game {
    /// Builds a game by evaluating `cost(i, j, a, b)` for every ordered pair
    /// `i != j` and action pair `(a, b)`.
    pub fn from_cost_fn<F>(n: usize, m: usize, mut cost: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize, usize) -> f64,
    {
        check_dims(n, m)?;
        let mut costs = vec![Vec::new(); n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut matrix = Vec::with_capacity(m * m);
                for a in 0..m {
                    for b in 0..m {
                        let v = cost(i, j, a, b);
                        if !v.is_finite() {
                            return Err(Error::InvalidGame(format!(
                                "non-finite cost at C^{{{i},{j}}}[{a},{b}]"
                            )));
                        }
                        matrix.push(v);
                    }
                }
                costs[i * n + j] = matrix;
            }
        }
        Ok(Game { n, m, costs })
    }

    /// Builds a game from explicit `(i, j, matrix)` records. Every ordered
    /// pair `i != j` must appear exactly once; matrices are row-major `m * m`.
    pub fn from_pair_matrices(
        n: usize,
        m: usize,
        pairs: impl IntoIterator<Item = (usize, usize, Vec<f64>)>,
    ) -> Result<Self> {
        check_dims(n, m)?;
        let mut costs: Vec<Option<Vec<f64>>> = vec![None; n * n];
        for (i, j, matrix) in pairs {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidGame(format!("bad player pair ({i}, {j})")));
            }
            if matrix.len() != m * m {
                return Err(Error::InvalidGame(format!(
                    "matrix for ({i}, {j}) has {} entries, expected {}",
                    matrix.len(),
                    m * m
                )));
            }
            if matrix.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidGame(format!(
                    "non-finite entry in matrix for ({i}, {j})"
                )));
            }
            if costs[i * n + j].replace(matrix).is_some() {
                return Err(Error::InvalidGame(format!("duplicate pair ({i}, {j})")));
            }
        }
        let mut flat = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                match costs[i * n + j].take() {
                    Some(mx) => flat.push(mx),
                    None if i == j => flat.push(Vec::new()),
                    None => {
                        return Err(Error::InvalidGame(format!("missing pair ({i}, {j})")));
                    }
                }
            }
        }
        Ok(Game { n, m, costs: flat })
    }

    pub fn num_players(&self) -> usize {
        self.n
    }

    pub fn num_actions(&self) -> usize {
        self.m
    }

    /// `m^n`, the number of joint actions.
    pub fn joint_action_count(&self) -> Result<u128> {
        (self.m as u128)
            .checked_pow(self.n as u32)
            .ok_or(Error::Overflow("m^n"))
    }

    /// Cost matrix entry `C^{ij}[a, b]`. Panics on out-of-range indices.
    #[inline]
    pub fn cost(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        debug_assert!(i != j);
        self.costs[i * self.n + j][a * self.m + b]
    }

    /// Row-major cost matrix `C^{ij}`. Panics when `i == j`.
    pub fn pair_matrix(&self, i: usize, j: usize) -> &[f64] {
        assert!(i != j, "no cost matrix for a player against itself");
        &self.costs[i * self.n + j]
    }

    pub fn max_abs_cost(&self) -> f64 {
        self.costs
            .iter()
            .flat_map(|m| m.iter())
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Stable FNV-1a fingerprint of the dimensions and cost bits. Used by the
    /// benchmark harness to record that every algorithm in a trial consumed
    /// the same game.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u64(self.n as u64);
        h.write_u64(self.m as u64);
        for matrix in &self.costs {
            for &v in matrix {
                h.write_u64(v.to_bits());
            }
        }
        h.finish()
    }
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidGame(format!("need at least 2 players, got {n}")));
    }
    if m < 2 {
        return Err(Error::InvalidGame(format!("need at least 2 actions, got {m}")));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct GameRepr {
    n: usize,
    m: usize,
    costs: Vec<PairCost>,
}

#[derive(Serialize, Deserialize)]
struct PairCost {
    i: usize,
    j: usize,
    matrix: Vec<Vec<f64>>,
}

impl TryFrom<GameRepr> for Game {
    type Error = Error;

    fn try_from(repr: GameRepr) -> Result<Self> {
        let m = repr.m;
        let pairs = repr.costs.into_iter().map(|rec| {
            let mut flat = Vec::with_capacity(m * m);
            for row in rec.matrix {
                flat.extend(row);
            }
            (rec.i, rec.j, flat)
        });
        Game::from_pair_matrices(repr.n, m, pairs)
    }
}

impl From<Game> for GameRepr {
    fn from(game: Game) -> Self {
        let (n, m) = (game.n, game.m);
        let mut costs = Vec::with_capacity(n * (n - 1));
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let flat = game.pair_matrix(i, j);
                let matrix = (0..m).map(|a| flat[a * m..(a + 1) * m].to_vec()).collect();
                costs.push(PairCost { i, j, matrix });
            }
        }
        GameRepr { n, m, costs }
    }
}

/// Minimal FNV-1a, kept local so fingerprints are stable across toolchains.
pub(crate) struct Fnv1a(u64);

impl Fnv1a {
    pub(crate) fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    pub(crate) fn write_u64(&mut self, v: u64) {
        for byte in v.to_le_bytes() {
            self.0 ^= u64::from(byte);
            self.0 = self.0.wrapping_mul(0x100_0000_01b3);
        }
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}

/// A probability vector over one player's `m` actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Strategy {
    probs: Vec<f64>,
}

impl Strategy {
    /// Validates nonnegativity and normalization within [`PROB_TOL`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty strategy".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(
                "strategy entries must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "strategy sums to {sum}, expected 1"
            )));
        }
        Ok(Strategy { probs })
    }

    /// The degenerate strategy playing `action` with probability 1.
    pub fn pure(m: usize, action: usize) -> Self {
        assert!(action < m, "action {action} out of range for m = {m}");
        let mut probs = vec![0.0; m];
        probs[action] = 1.0;
        Strategy { probs }
    }

    pub fn uniform(m: usize) -> Self {
        assert!(m > 0);
        Strategy {
            probs: vec![1.0 / m as f64; m],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_actions(&self) -> usize {
        self.probs.len()
    }

    /// True when all mass sits on a single action (within 1e-9).
    pub fn is_pure(&self) -> bool {
        self.probs.iter().any(|&p| p > 1.0 - 1e-9)
    }

    /// Inverse-CDF draw of one action.
    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        self.probs.len() - 1
    }
}

impl TryFrom<Vec<f64>> for Strategy {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Strategy::new(probs)
    }
}

impl From<Strategy> for Vec<f64> {
    fn from(s: Strategy) -> Self {
        s.probs
    }
}

/// One strategy per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    strategies: Vec<Strategy>,
}

impl StrategyProfile {
    pub fn new(strategies: Vec<Strategy>) -> Result<Self> {
        if strategies.is_empty() {
            return Err(Error::InvalidDistribution("empty profile".into()));
        }
        let m = strategies[0].num_actions();
        if strategies.iter().any(|s| s.num_actions() != m) {
            return Err(Error::InvalidDistribution(
                "all strategies in a profile must share the action count".into(),
            ));
        }
        Ok(StrategyProfile { strategies })
    }

    /// The pure profile `(a_0, ..., a_{n-1})`.
    pub fn pure(m: usize, actions: &[usize]) -> Self {
        StrategyProfile {
            strategies: actions.iter().map(|&a| Strategy::pure(m, a)).collect(),
        }
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    pub fn player(&self, i: usize) -> &Strategy {
        &self.strategies[i]
    }

    pub fn num_players(&self) -> usize {
        self.strategies.len()
    }

    pub fn num_actions(&self) -> usize {
        self.strategies[0].num_actions()
    }

    pub fn is_pure(&self) -> bool {
        self.strategies.iter().all(Strategy::is_pure)
    }

    /// L-infinity distance over all concatenated strategy entries.
    pub fn linf_distance(&self, other: &StrategyProfile) -> f64 {
        assert_eq!(self.num_players(), other.num_players());
        let mut d: f64 = 0.0;
        for (a, b) in self.strategies.iter().zip(&other.strategies) {
            for (x, y) in a.probs().iter().zip(b.probs()) {
                d = d.max((x - y).abs());
            }
        }
        d
    }

    pub(crate) fn check_for(&self, game: &Game) -> Result<()> {
        if self.num_players() != game.num_players() || self.num_actions() != game.num_actions() {
            return Err(Error::InvalidDistribution(format!(
                "profile shape ({}, {}) does not match game ({}, {})",
                self.num_players(),
                self.num_actions(),
                game.num_players(),
                game.num_actions()
            )));
        }
        Ok(())
    }
}

/// One pure action per player, paired with its flat mixed-radix index.
///
/// Actions are 0-based. The flat index is base-`m` with player 0 most
/// significant: `flat = sum_i a_i * m^(n-1-i)`. This single canonical order
/// is shared by file formats, dense tensors, and LP column indexing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointAction {
    actions: Vec<usize>,
}

impl JointAction {
    pub fn new(actions: Vec<usize>, m: usize) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::OutOfRange("empty joint action".into()));
        }
        if let Some(&bad) = actions.iter().find(|&&a| a >= m) {
            return Err(Error::OutOfRange(format!(
                "action {bad} out of range for m = {m}"
            )));
        }
        Ok(JointAction { actions })
    }

    /// Decodes a flat index into per-player actions.
    pub fn from_flat(flat: usize, n: usize, m: usize) -> Result<Self> {
        let count = (m as u128)
            .checked_pow(n as u32)
            .ok_or(Error::Overflow("m^n"))?;
        if (flat as u128) >= count {
            return Err(Error::OutOfRange(format!(
                "flat index {flat} out of range for {count} joint actions"
            )));
        }
        let mut actions = vec![0usize; n];
        let mut rest = flat;
        for slot in actions.iter_mut().rev() {
            *slot = rest % m;
            rest /= m;
        }
        Ok(JointAction { actions })
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    /// Encodes to the flat mixed-radix index, player 0 most significant.
    pub fn flat_index(&self, m: usize) -> usize {
        encode_joint_action(&self.actions, m)
    }
}

/// Mixed-radix encoding of `actions`, player 0 most significant. Panics on
/// out-of-range actions; use [`JointAction::new`] for checked construction.
pub fn encode_joint_action(actions: &[usize], m: usize) -> usize {
    let mut flat = 0usize;
    for &a in actions {
        assert!(a < m, "action {a} out of range for m = {m}");
        flat = flat * m + a;
    }
    flat
}

/// In-place odometer step through joint actions in flat-index order.
/// Returns `false` once the digits wrap past the last joint action.
pub(crate) fn advance_joint_action(digits: &mut [usize], m: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < m {
            return true;
        }
        *d = 0;
    }
    false
}

/// A probability distribution over joint actions.
///
/// `Dense` stores the full `m^n` tensor in flat-index order. `Rank1Mixture`
/// stores a convex combination of product distributions — `d` strategy
/// profiles with weights `gamma` — and supports expected-cost evaluation in
/// `O(d n^2 m^2)` without ever touching the tensor.
#[derive(Debug, Clone, PartialEq)]
pub enum JointDistribution {
    Dense(DenseDistribution),
    Rank1Mixture(MixtureDistribution),
}

impl JointDistribution {
    pub fn num_players(&self) -> usize {
        match self {
            JointDistribution::Dense(d) => d.n,
            JointDistribution::Rank1Mixture(m) => m.points[0].num_players(),
        }
    }

    pub fn num_actions(&self) -> usize {
        match self {
            JointDistribution::Dense(d) => d.m,
            JointDistribution::Rank1Mixture(m) => m.points[0].num_actions(),
        }
    }

    /// Upper bound on the tensor rank of this distribution: the mixture size
    /// `d` for rank-1 mixtures, `m^n` for dense tensors.
    pub fn rank_bound(&self) -> u128 {
        match self {
            JointDistribution::Dense(d) => d.probs.len() as u128,
            JointDistribution::Rank1Mixture(m) => m.points.len() as u128,
        }
    }

    /// Materializes the full tensor, refusing above `cap` entries.
    pub fn densify(&self, cap: u128) -> Result<DenseDistribution> {
        match self {
            JointDistribution::Dense(d) => {
                if d.probs.len() as u128 > cap {
                    return Err(Error::CapExceeded {
                        required: d.probs.len() as u128,
                        cap,
                    });
                }
                record_dense_allocation();
                Ok(d.clone())
            }
            JointDistribution::Rank1Mixture(mix) => mix.densify(cap),
        }
    }

    /// Draws one joint action. Dense: inverse CDF over the flat index.
    /// Mixture: draw a component per `gamma`, then each player's action
    /// independently from that component. Deterministic given the RNG state.
    pub fn sample(&self, rng: &mut impl Rng) -> JointAction {
        match self {
            JointDistribution::Dense(d) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut flat = d.probs.len() - 1;
                for (idx, &p) in d.probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        flat = idx;
                        break;
                    }
                }
                JointAction::from_flat(flat, d.n, d.m).expect("valid by construction")
            }
            JointDistribution::Rank1Mixture(mix) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut k = mix.points.len() - 1;
                for (idx, &w) in mix.weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        k = idx;
                        break;
                    }
                }
                let point = &mix.points[k];
                let actions = point.strategies().iter().map(|s| s.sample(rng)).collect();
                JointAction {
                    actions,
                }
            }
        }
    }
}

/// Dense joint-action tensor in flat-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDistribution {
    n: usize,
    m: usize,
    probs: Vec<f64>,
}

impl DenseDistribution {
    /// Validates shape, nonnegativity, and normalization within [`PROB_TOL`].
    pub fn new(n: usize, m: usize, probs: Vec<f64>) -> Result<Self> {
        let count = (m as u128)
            .checked_pow(n as u32)
            .ok_or(Error::Overflow("m^n"))?;
        if probs.len() as u128 != count {
            return Err(Error::InvalidDistribution(format!(
                "tensor has {} entries, expected {count}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(
                "tensor entries must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "tensor sums to {sum}, expected 1"
            )));
        }
        record_dense_allocation();
        Ok(DenseDistribution { n, m, probs })
    }

    /// The degenerate distribution on one joint action.
    pub fn one_hot(n: usize, m: usize, action: &JointAction) -> Result<Self> {
        let count = (m as u128)
            .checked_pow(n as u32)
            .ok_or(Error::Overflow("m^n"))?;
        let count = usize::try_from(count).map_err(|_| Error::Overflow("m^n"))?;
        let mut probs = vec![0.0; count];
        probs[action.flat_index(m)] = 1.0;
        record_dense_allocation();
        Ok(DenseDistribution { n, m, probs })
    }

    pub fn num_players(&self) -> usize {
        self.n
    }

    pub fn num_actions(&self) -> usize {
        self.m
    }

    /// Flat tensor, joint actions in mixed-radix order.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, action: &JointAction) -> f64 {
        self.probs[action.flat_index(self.m)]
    }
}

/// Convex combination of product distributions (rank-1 simple tensors).
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDistribution {
    points: Vec<StrategyProfile>,
    weights: Vec<f64>,
}

impl MixtureDistribution {
    /// Validates weight normalization and consistent profile shapes.
    pub fn new(points: Vec<StrategyProfile>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::InvalidDistribution(
                "mixture needs matching, nonempty points and weights".into(),
            ));
        }
        let (n, m) = (points[0].num_players(), points[0].num_actions());
        if points
            .iter()
            .any(|p| p.num_players() != n || p.num_actions() != m)
        {
            return Err(Error::InvalidDistribution(
                "all mixture points must share the game shape".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "mixture weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "mixture weights sum to {sum}, expected 1"
            )));
        }
        Ok(MixtureDistribution { points, weights })
    }

    pub fn points(&self) -> &[StrategyProfile] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn densify(&self, cap: u128) -> Result<DenseDistribution> {
        let n = self.points[0].num_players();
        let m = self.points[0].num_actions();
        let count = (m as u128)
            .checked_pow(n as u32)
            .ok_or(Error::Overflow("m^n"))?;
        if count > cap {
            return Err(Error::CapExceeded {
                required: count,
                cap,
            });
        }
        let count = usize::try_from(count).map_err(|_| Error::Overflow("m^n"))?;
        let mut probs = vec![0.0; count];
        let mut digits = vec![0usize; n];
        for flat in 0..count {
            let mut p = 0.0;
            for (point, &w) in self.points.iter().zip(&self.weights) {
                let mut prod = w;
                for (i, &a) in digits.iter().enumerate() {
                    prod *= point.player(i).probs()[a];
                }
                p += prod;
            }
            probs[flat] = p;
            advance_joint_action(&mut digits, m);
        }
        DenseDistribution::new(n, m, probs)
    }
}

/// Materializes the product distribution `z_a = prod_i x_i[a_i]` of a
/// strategy profile as a dense tensor.
///
/// Refuses with [`Error::CapExceeded`] when `m^n` exceeds `cap`, signalling
/// that the caller must stay in rank-1 form.
pub fn profile_to_distribution(
    game: &Game,
    profile: &StrategyProfile,
    cap: u128,
) -> Result<JointDistribution> {
    profile.check_for(game)?;
    let mix = MixtureDistribution::new(vec![profile.clone()], vec![1.0])?;
    Ok(JointDistribution::Dense(mix.densify(cap)?))
}

/// Expected cost per player under a joint-action distribution (Eq.-4-style
/// polymatrix sum).
///
/// Dense inputs are evaluated by streaming over the tensor; rank-1 mixtures
/// are evaluated by linearity as weighted bilinear forms in `O(d n^2 m^2)`,
/// never materializing the tensor.
pub fn cost_of_distribution(game: &Game, z: &JointDistribution) -> Vec<f64> {
    match z {
        JointDistribution::Dense(d) => {
            assert_eq!(d.n, game.num_players(), "distribution does not match game");
            assert_eq!(d.m, game.num_actions(), "distribution does not match game");
            let n = d.n;
            let mut costs = vec![0.0; n];
            let mut digits = vec![0usize; n];
            for &p in &d.probs {
                if p != 0.0 {
                    for i in 0..n {
                        let mut per_action = 0.0;
                        for j in 0..n {
                            if j != i {
                                per_action += game.cost(i, j, digits[i], digits[j]);
                            }
                        }
                        costs[i] += p * per_action;
                    }
                }
                advance_joint_action(&mut digits, d.m);
            }
            costs
        }
        JointDistribution::Rank1Mixture(mix) => {
            let n = game.num_players();
            let mut costs = vec![0.0; n];
            for (point, &w) in mix.points.iter().zip(&mix.weights) {
                let point_costs = cost_of_profile(game, point);
                for (acc, c) in costs.iter_mut().zip(point_costs) {
                    *acc += w * c;
                }
            }
            costs
        }
    }
}

/// Expected cost per player of a strategy profile: `c_i = sum_{j != i}
/// x_i^T C^{ij} x_j`, evaluated without tensor materialization.
pub fn cost_of_profile(game: &Game, profile: &StrategyProfile) -> Vec<f64> {
    profile
        .check_for(game)
        .expect("profile does not match game");
    let (n, m) = (game.num_players(), game.num_actions());
    let mut costs = vec![0.0; n];
    for i in 0..n {
        let xi = profile.player(i).probs();
        for j in 0..n {
            if j == i {
                continue;
            }
            let xj = profile.player(j).probs();
            let matrix = game.pair_matrix(i, j);
            let mut bilinear = 0.0;
            for (a, &pa) in xi.iter().enumerate() {
                if pa == 0.0 {
                    continue;
                }
                let row = &matrix[a * m..(a + 1) * m];
                let mut inner = 0.0;
                for (&c, &pb) in row.iter().zip(xj) {
                    inner += c * pb;
                }
                bilinear += pa * inner;
            }
            costs[i] += bilinear;
        }
    }
    costs
}
