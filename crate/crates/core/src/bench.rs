//! Monte Carlo benchmark harness.
//!
//! Runs per-(n, r) trials that pit four algorithms against the same sampled
//! queue game — the uncoordinated Nash baseline, the dense CE program, and
//! the two RRCE variants — and records objective value, average delay cost,
//! Gini index, and timings per algorithm.
//!
//! Trials are embarrassingly parallel. Every random draw comes from a stream
//! seeded by `derive_seed(base, [n, r, trial])`, so the emitted records are
//! identical regardless of worker count or scheduling. Timing columns are
//! the only physically non-deterministic fields.
//!
//! Timing split: `solver_time_s` covers equilibrium search and LP solves
//! (for RRCE, the Nash phase plus the weight program); `total_time_s` adds
//! pre-processing such as constraint assembly and cost-vector precomputes.

use std::fs::File;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atm::{build_queue_game, sample_rates, AtmConfig};
use crate::ce::{solve_ce_optimal, solve_rrce, Objective};
use crate::error::{Error, Result};
use crate::game::{cost_of_profile, Game};
use crate::nash::{enumerate_pure_nash, find_first_nash, find_nash_random, NashSearchConfig};
use crate::seeding::derive_seed;

/// The algorithms under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// First certified equilibrium from random restarts; no coordination.
    Nash,
    /// Optimal correlated equilibrium over the dense joint-action space.
    Ce,
    /// RRCE over equilibria found by random initialization.
    RrceRandom,
    /// RRCE over all pure equilibria found by exhaustive enumeration.
    RrceBrute,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Nash,
        Algorithm::Ce,
        Algorithm::RrceRandom,
        Algorithm::RrceBrute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nash => "nash",
            Algorithm::Ce => "ce",
            Algorithm::RrceRandom => "rrce-random",
            Algorithm::RrceBrute => "rrce-brute",
        }
    }

    /// Stable tag for seed derivation, independent of list position.
    fn seed_tag(self) -> u64 {
        match self {
            Algorithm::Nash => 0,
            Algorithm::Ce => 1,
            Algorithm::RrceRandom => 2,
            Algorithm::RrceBrute => 3,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome class of one algorithm run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialStatus {
    Solved,
    CapExceeded,
    NoEquilibriumFound,
    SolverFailure,
}

impl std::fmt::Display for TrialStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TrialStatus::Solved => "Solved",
            TrialStatus::CapExceeded => "CapExceeded",
            TrialStatus::NoEquilibriumFound => "NoEquilibriumFound",
            TrialStatus::SolverFailure => "SolverFailure",
        };
        f.write_str(s)
    }
}

fn status_of_error(error: &Error) -> TrialStatus {
    match error {
        Error::CapExceeded { .. } => TrialStatus::CapExceeded,
        Error::NoEquilibriumFound | Error::EmptyNashSet => TrialStatus::NoEquilibriumFound,
        _ => TrialStatus::SolverFailure,
    }
}

/// One (n, r) grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSetting {
    pub n: usize,
    pub r: u32,
}

impl TrialSetting {
    pub fn num_actions(self) -> usize {
        1usize << self.r
    }

    pub fn joint_actions(self) -> u128 {
        (self.num_actions() as u128).pow(self.n as u32)
    }
}

/// The paper grid: n in 2..=7 crossed with r in 1..=3, 18 settings spanning
/// 2^2 to 2^21 joint actions.
pub fn default_grid() -> Vec<TrialSetting> {
    let mut grid = Vec::new();
    for n in 2..=7 {
        for r in 1..=3 {
            grid.push(TrialSetting { n, r });
        }
    }
    grid
}

/// Harness configuration, echoed verbatim into every record and manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Yield penalty, minutes.
    pub rho: f64,
    /// Collision penalty, minutes.
    pub delta: f64,
    /// Fairness threshold of the objective, minutes.
    pub fairness_delta: f64,
    /// Restart budget for the random Nash search.
    pub restarts: usize,
    /// KKT acceptance tolerance for certified equilibria.
    pub nash_tol: f64,
    /// Iteration budget per restart.
    pub max_iterations: usize,
    /// Equilibrium dedupe tolerance, L-infinity.
    pub dedupe_tol: f64,
    /// Joint-action cap for the dense CE program.
    pub ce_cap: u128,
    /// Joint-action cap for pure-equilibrium enumeration.
    pub enum_cap: u128,
    /// Entry cap for dense tensor materialization.
    pub dense_cap: u128,
    /// Uniform rate-sampling range.
    pub rate_low: f64,
    pub rate_high: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            rho: crate::atm::DEFAULT_RHO,
            delta: crate::atm::DEFAULT_DELTA,
            fairness_delta: crate::ce::DEFAULT_FAIRNESS_DELTA,
            restarts: 10,
            nash_tol: 1e-8,
            max_iterations: 10_000,
            dedupe_tol: 1e-4,
            ce_cap: crate::ce::DEFAULT_CE_CAP,
            enum_cap: crate::nash::DEFAULT_ENUM_CAP,
            dense_cap: crate::game::DEFAULT_DENSE_CAP,
            rate_low: crate::atm::DEFAULT_RATE_RANGE.0,
            rate_high: crate::atm::DEFAULT_RATE_RANGE.1,
        }
    }
}

impl BenchConfig {
    pub fn objective(&self) -> Objective {
        Objective::FairnessThreshold {
            delta: self.fairness_delta,
        }
    }

    pub fn nash_search(&self) -> NashSearchConfig {
        NashSearchConfig {
            restarts: self.restarts,
            tol: self.nash_tol,
            max_iterations: self.max_iterations,
            dedupe_tol: self.dedupe_tol,
        }
    }
}

/// Metrics of one algorithm on one trial. Metric fields are `None` whenever
/// `status != Solved`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgorithmResult {
    pub algorithm: Algorithm,
    pub status: TrialStatus,
    #[serde(rename = "J")]
    pub j: Option<f64>,
    pub costs: Option<Vec<f64>>,
    pub avg_cost: Option<f64>,
    pub gini: Option<f64>,
    /// Hull weights, RRCE variants only.
    pub gamma: Option<Vec<f64>>,
    pub solver_time_s: f64,
    pub total_time_s: f64,
}

/// One Monte Carlo trial: the sampled game plus one result per algorithm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub r: u32,
    pub m: usize,
    pub joint_actions: u128,
    pub trial: usize,
    pub seed: u64,
    /// Arrival rates, fixed across all algorithms within the trial.
    pub rates: Vec<f64>,
    /// Fingerprint of the game every algorithm consumed.
    pub game_fingerprint: u64,
    pub results: Vec<AlgorithmResult>,
    pub config: BenchConfig,
}

/// Mean per-player delay cost.
pub fn avg_cost(costs: &[f64]) -> f64 {
    assert!(!costs.is_empty());
    costs.iter().sum::<f64>() / costs.len() as f64
}

/// Gini index over ordered pairs: `sum_{i,j} |c_i - c_j| / (2 n^2 AC)`.
/// Defined as 0 when the average cost is 0 (all-equal, all-zero costs).
/// Lies in [0, 1] for nonnegative cost vectors.
pub fn gini(costs: &[f64]) -> f64 {
    let n = costs.len() as f64;
    let ac = avg_cost(costs);
    if ac == 0.0 {
        return 0.0;
    }
    let mut pairwise = 0.0;
    for ci in costs {
        for cj in costs {
            pairwise += (ci - cj).abs();
        }
    }
    pairwise / (2.0 * ac * n * n)
}

/// Runs one algorithm on `game`, classifying failures into statuses instead
/// of propagating them.
pub fn run_algorithm(
    game: &Game,
    algorithm: Algorithm,
    objective: &Objective,
    cfg: &BenchConfig,
    seed: u64,
) -> AlgorithmResult {
    let started = Instant::now();
    let mut solver_time_s = 0.0;
    let outcome: Result<(Vec<f64>, f64, Option<Vec<f64>>)> = (|| match algorithm {
        Algorithm::Nash => {
            let solve_start = Instant::now();
            let point = find_first_nash(game, &cfg.nash_search(), seed)?;
            solver_time_s = solve_start.elapsed().as_secs_f64();
            let costs = cost_of_profile(game, &point.profile);
            let j = objective.evaluate(&costs);
            Ok((costs, j, None))
        }
        Algorithm::Ce => {
            let solution = solve_ce_optimal(game, objective, cfg.ce_cap)?;
            solver_time_s = solution.solver_time_s;
            Ok((solution.costs, solution.j, None))
        }
        Algorithm::RrceRandom => {
            let solve_start = Instant::now();
            let nash = find_nash_random(game, &cfg.nash_search(), seed)?;
            let nash_time = solve_start.elapsed().as_secs_f64();
            let solution = solve_rrce(game, &nash, objective)?;
            solver_time_s = nash_time + solution.solver_time_s;
            Ok((solution.costs, solution.j, Some(solution.gamma)))
        }
        Algorithm::RrceBrute => {
            let solve_start = Instant::now();
            let nash = enumerate_pure_nash(game, cfg.enum_cap)?;
            let nash_time = solve_start.elapsed().as_secs_f64();
            if nash.is_empty() {
                return Err(Error::NoEquilibriumFound);
            }
            let solution = solve_rrce(game, &nash, objective)?;
            solver_time_s = nash_time + solution.solver_time_s;
            Ok((solution.costs, solution.j, Some(solution.gamma)))
        }
    })();
    let total_time_s = started.elapsed().as_secs_f64();

    match outcome {
        Ok((costs, j, gamma)) => AlgorithmResult {
            algorithm,
            status: TrialStatus::Solved,
            j: Some(j),
            avg_cost: Some(avg_cost(&costs)),
            gini: Some(gini(&costs)),
            costs: Some(costs),
            gamma,
            solver_time_s,
            total_time_s,
        },
        Err(error) => AlgorithmResult {
            algorithm,
            status: status_of_error(&error),
            j: None,
            costs: None,
            avg_cost: None,
            gini: None,
            gamma: None,
            solver_time_s,
            total_time_s,
        },
    }
}

/// Runs one trial: samples rates once, builds the game once, and runs every
/// requested algorithm on that same game.
pub fn run_trial(
    setting: TrialSetting,
    algorithms: &[Algorithm],
    seed: u64,
    cfg: &BenchConfig,
) -> Result<TrialRecord> {
    let mut rate_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[u64::MAX]));
    let rates = sample_rates(setting.n, &mut rate_rng, cfg.rate_low, cfg.rate_high);
    let atm = AtmConfig::new(setting.n, setting.r, rates.clone(), cfg.rho, cfg.delta)?;
    let game = build_queue_game(&atm)?;
    let objective = cfg.objective();

    let results = algorithms
        .iter()
        .map(|&algorithm| {
            let algo_seed = derive_seed(seed, &[algorithm.seed_tag()]);
            run_algorithm(&game, algorithm, &objective, cfg, algo_seed)
        })
        .collect();

    Ok(TrialRecord {
        n: setting.n,
        r: setting.r,
        m: setting.num_actions(),
        joint_actions: setting.joint_actions(),
        trial: 0, // filled by monte_carlo
        seed,
        rates,
        game_fingerprint: game.fingerprint(),
        results,
        config: cfg.clone(),
    })
}

/// Runs `trials_per_setting` trials per grid point, in parallel, with per-
/// trial seeds derived from `(base_seed, n, r, trial)`. Records come back in
/// deterministic (setting, trial) order regardless of thread count.
pub fn monte_carlo(
    settings: &[TrialSetting],
    trials_per_setting: usize,
    base_seed: u64,
    algorithms: &[Algorithm],
    cfg: &BenchConfig,
) -> Result<Vec<TrialRecord>> {
    assert!(!settings.is_empty(), "settings must be nonempty");
    let tasks: Vec<(TrialSetting, usize)> = settings
        .iter()
        .flat_map(|&s| (0..trials_per_setting).map(move |t| (s, t)))
        .collect();
    tasks
        .par_iter()
        .map(|&(setting, trial)| {
            let seed = derive_seed(base_seed, &[setting.n as u64, setting.r as u64, trial as u64]);
            let mut record = run_trial(setting, algorithms, seed, cfg)?;
            record.trial = trial;
            Ok(record)
        })
        .collect()
}

/// Formats a float with 9 significant digits, empty for `None`.
fn fmt_metric(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.8e}"),
        None => String::new(),
    }
}

/// Writes one row per (trial, algorithm) with the 13-column schema:
/// `n, r, m, joint_actions, trial, algorithm, status, J, AC, GI,
/// solver_time_s, total_time_s, seed`. RFC-4180 quoting, floats with 9
/// significant digits. Byte-identical across reruns of the same records,
/// timing columns aside.
pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "n",
        "r",
        "m",
        "joint_actions",
        "trial",
        "algorithm",
        "status",
        "J",
        "AC",
        "GI",
        "solver_time_s",
        "total_time_s",
        "seed",
    ])?;
    for record in records {
        for result in &record.results {
            writer.write_record([
                record.n.to_string(),
                record.r.to_string(),
                record.m.to_string(),
                record.joint_actions.to_string(),
                record.trial.to_string(),
                result.algorithm.name().to_string(),
                result.status.to_string(),
                fmt_metric(result.j),
                fmt_metric(result.avg_cost),
                fmt_metric(result.gini),
                fmt_metric(Some(result.solver_time_s)),
                fmt_metric(Some(result.total_time_s)),
                record.seed.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Type-7 quantile (linear interpolation between order statistics) of an
/// already-sorted slice.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    assert!((0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn quartiles(values: &mut Vec<f64>) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some((
        quantile_type7(values, 0.25),
        quantile_type7(values, 0.5),
        quantile_type7(values, 0.75),
    ))
}

/// Writes the long-format figure inputs:
///
/// - `plot_time.csv`: per (joint_actions, algorithm), quartiles of solver
///   and total time over solved trials, sorted by joint-action count.
/// - `plot_quality.csv`: per (n, r, algorithm), quartiles of GI and AC.
pub fn emit_plot_data(records: &[TrialRecord], dir: &Path) -> Result<()> {
    let mut keys: Vec<(u128, usize, u32, Algorithm)> = Vec::new();
    for record in records {
        for result in &record.results {
            let key = (record.joint_actions, record.n, record.r, result.algorithm);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
    }
    keys.sort_by_key(|&(ja, n, r, algo)| (ja, n, r, algo.seed_tag()));

    let collect = |key: &(u128, usize, u32, Algorithm), metric: &dyn Fn(&AlgorithmResult) -> Option<f64>| {
        let mut values = Vec::new();
        for record in records {
            if record.joint_actions == key.0 && record.n == key.1 && record.r == key.2 {
                for result in &record.results {
                    if result.algorithm == key.3 && result.status == TrialStatus::Solved {
                        if let Some(v) = metric(result) {
                            values.push(v);
                        }
                    }
                }
            }
        }
        values
    };

    let mut time_writer = csv::Writer::from_path(dir.join("plot_time.csv"))?;
    time_writer.write_record([
        "joint_actions",
        "algorithm",
        "solver_time_q1",
        "solver_time_median",
        "solver_time_q3",
        "total_time_q1",
        "total_time_median",
        "total_time_q3",
    ])?;
    for key in &keys {
        let mut solver = collect(key, &|r| Some(r.solver_time_s));
        let mut total = collect(key, &|r| Some(r.total_time_s));
        let (Some(sq), Some(tq)) = (quartiles(&mut solver), quartiles(&mut total)) else {
            continue;
        };
        time_writer.write_record([
            key.0.to_string(),
            key.3.name().to_string(),
            fmt_metric(Some(sq.0)),
            fmt_metric(Some(sq.1)),
            fmt_metric(Some(sq.2)),
            fmt_metric(Some(tq.0)),
            fmt_metric(Some(tq.1)),
            fmt_metric(Some(tq.2)),
        ])?;
    }
    time_writer.flush()?;

    let mut quality_writer = csv::Writer::from_path(dir.join("plot_quality.csv"))?;
    quality_writer.write_record([
        "n",
        "r",
        "algorithm",
        "gi_q1",
        "gi_median",
        "gi_q3",
        "ac_q1",
        "ac_median",
        "ac_q3",
    ])?;
    for key in &keys {
        let mut gi = collect(key, &|r| r.gini);
        let mut ac = collect(key, &|r| r.avg_cost);
        let (Some(gq), Some(aq)) = (quartiles(&mut gi), quartiles(&mut ac)) else {
            continue;
        };
        quality_writer.write_record([
            key.1.to_string(),
            key.2.to_string(),
            key.3.name().to_string(),
            fmt_metric(Some(gq.0)),
            fmt_metric(Some(gq.1)),
            fmt_metric(Some(gq.2)),
            fmt_metric(Some(aq.0)),
            fmt_metric(Some(aq.1)),
            fmt_metric(Some(aq.2)),
        ])?;
    }
    quality_writer.flush()?;
    Ok(())
}

/// Run-level metadata written next to the CSVs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub base_seed: u64,
    pub trials_per_setting: usize,
    pub settings: Vec<TrialSetting>,
    pub algorithms: Vec<Algorithm>,
    pub config: BenchConfig,
    pub threads: usize,
    /// Quartile convention used in the plot files.
    pub quartile_convention: String,
    pub hardware: String,
}

impl RunManifest {
    pub fn new(
        base_seed: u64,
        trials_per_setting: usize,
        settings: Vec<TrialSetting>,
        algorithms: Vec<Algorithm>,
        config: BenchConfig,
        threads: usize,
    ) -> Self {
        RunManifest {
            version: version_string(),
            base_seed,
            trials_per_setting,
            settings,
            algorithms,
            config,
            threads,
            quartile_convention: "type-7 linear interpolation between order statistics".into(),
            hardware: hardware_note(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = File::create(path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        file.write_all(b"\n")?;
        Ok(())
    }
}

/// Package version, suffixed with `git describe` output when available.
pub fn version_string() -> String {
    let base = concat!("polymatrix ", env!("CARGO_PKG_VERSION"));
    let described = std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|out| out.status.success())
        .and_then(|out| String::from_utf8(out.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty());
    match described {
        Some(desc) => format!("{base} ({desc})"),
        None => base.to_string(),
    }
}

fn hardware_note() -> String {
    let cpus = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1);
    format!(
        "{} {}, {cpus} logical cpus",
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}
