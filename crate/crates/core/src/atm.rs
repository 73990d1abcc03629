//! Departure/arrival runway-queue games.
//!
//! Each player is a queue of aircraft fed by a Poisson process with rate
//! `rate[i]`; every round it chooses, per runway, to occupy or yield. With
//! `r` runways the action space has `m = 2^r` bitmask actions. Per runway, a
//! collision (both sides occupy) costs `delta`, yielding costs `rho`, and
//! occupying alone is free; contributions add across runways and scale by
//! the queue's rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Game;

/// Yield penalty in minutes: one game round.
pub const DEFAULT_RHO: f64 = 5.0;
/// Collision penalty in minutes, far above every other matrix entry.
pub const DEFAULT_DELTA: f64 = 500.0;
/// Default uniform sampling range for queue arrival rates.
pub const DEFAULT_RATE_RANGE: (f64, f64) = (0.5, 2.0);

/// A fully resolved queue-game instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtmConfig {
    /// Number of queues (players).
    pub n: usize,
    /// Number of runways; the action count is `2^r`.
    pub r: u32,
    /// Arrival rate per queue, aircraft per round.
    pub rates: Vec<f64>,
    /// Yield penalty, minutes.
    pub rho: f64,
    /// Collision penalty, minutes.
    pub delta: f64,
}

impl AtmConfig {
    pub fn new(n: usize, r: u32, rates: Vec<f64>, rho: f64, delta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 queues, got {n}")));
        }
        if r < 1 {
            return Err(Error::InvalidConfig("need at least 1 runway".into()));
        }
        if r > 20 {
            return Err(Error::InvalidConfig(format!(
                "{r} runways would need 2^{r} actions per cost matrix"
            )));
        }
        if rates.len() != n {
            return Err(Error::InvalidConfig(format!(
                "{} rates for {n} queues",
                rates.len()
            )));
        }
        if rates.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidConfig("rates must be positive and finite".into()));
        }
        if !(delta.is_finite() && rho.is_finite() && delta > rho && rho > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "penalties must satisfy delta > rho > 0, got delta = {delta}, rho = {rho}"
            )));
        }
        Ok(AtmConfig {
            n,
            r,
            rates,
            rho,
            delta,
        })
    }

    /// `m = 2^r`.
    pub fn num_actions(&self) -> usize {
        1usize << self.r
    }
}

/// Per-runway choice inside a composite action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunwayChoice {
    Occupy,
    Yield,
}

/// Whether composite `action` yields `runway`. Runway 0 is the most
/// significant bit, so for `r = 2` the action order is
/// (O,O), (O,Y), (Y,O), (Y,Y).
pub fn action_yields(action: usize, runway: u32, r: u32) -> bool {
    debug_assert!(runway < r);
    (action >> (r - 1 - runway)) & 1 == 1
}

/// All `2^r` composite actions in index order.
pub fn runway_action_space(r: u32) -> Vec<Vec<RunwayChoice>> {
    assert!(r >= 1);
    (0..1usize << r)
        .map(|action| {
            (0..r)
                .map(|w| {
                    if action_yields(action, w, r) {
                        RunwayChoice::Yield
                    } else {
                        RunwayChoice::Occupy
                    }
                })
                .collect()
        })
        .collect()
}

/// Builds the polymatrix queue game for `cfg`.
///
/// Entry `C^{ij}[a, b] = rate_i * sum_w cost_w` where per runway `w` the
/// contribution is `delta` if both `a` and `b` occupy it, `rho` if `a`
/// yields it, and zero if `a` occupies it alone. The same matrix applies
/// against every opponent `j`; with more than two players a queue colliding
/// with several opponents on one runway is charged once per opponent through
/// the pairwise sum.
pub fn build_queue_game(cfg: &AtmConfig) -> Result<Game> {
    let m = cfg.num_actions();
    Game::from_cost_fn(cfg.n, m, |i, _j, a, b| {
        let mut cost = 0.0;
        for w in 0..cfg.r {
            if action_yields(a, w, cfg.r) {
                cost += cfg.rho;
            } else if !action_yields(b, w, cfg.r) {
                cost += cfg.delta;
            }
        }
        cfg.rates[i] * cost
    })
}

/// `n` independent uniform draws in `[low, high]`, deterministic by the RNG
/// state. Rates stay fixed across all algorithms within a trial.
pub fn sample_rates(n: usize, rng: &mut impl Rng, low: f64, high: f64) -> Vec<f64> {
    assert!(
        0.0 < low && low <= high,
        "rate range must satisfy 0 < low <= high"
    );
    (0..n).map(|_| rng.random_range(low..=high)).collect()
}

/// The two-queue, single-runway chicken game with unit rates:
/// `C^{12} = C^{21} = [[delta, 0], [rho, rho]]`.
pub fn two_player_single_runway(delta: f64, rho: f64) -> Result<Game> {
    let cfg = AtmConfig::new(2, 1, vec![1.0, 1.0], rho, delta)?;
    build_queue_game(&cfg)
}

/// Scenario file schema: rates either listed or described by a seeded range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtmScenario {
    pub n: usize,
    pub r: u32,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub rates: RateSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateSpec {
    Fixed(Vec<f64>),
    Sampled { seed: u64, low: f64, high: f64 },
}

fn default_rho() -> f64 {
    DEFAULT_RHO
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl AtmScenario {
    /// Resolves sampled rates into a concrete [`AtmConfig`].
    pub fn resolve(&self) -> Result<AtmConfig> {
        let rates = match &self.rates {
            RateSpec::Fixed(rates) => rates.clone(),
            RateSpec::Sampled { seed, low, high } => {
                if !(0.0 < *low && low <= high) {
                    return Err(Error::InvalidConfig(format!(
                        "rate range must satisfy 0 < low <= high, got [{low}, {high}]"
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                sample_rates(self.n, &mut rng, *low, *high)
            }
        };
        AtmConfig::new(self.n, self.r, rates, self.rho, self.delta)
    }
}
