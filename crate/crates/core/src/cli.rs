//! Command-line interface: one thin binary over the library.
//!
//! Subcommands: `solve` (one algorithm on a game file), `gen-atm` (write a
//! runway-queue game file), `bench` (the Monte Carlo sweep), and
//! `size-report` (linear-equation counts). Machine output goes to files;
//! progress and diagnostics go to standard error.
//!
//! Exit codes: 0 success, 2 bad arguments or unreadable inputs, 3 cap
//! exceeded, 4 solver failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::atm::{build_queue_game, AtmScenario, RateSpec, DEFAULT_DELTA, DEFAULT_RHO};
use crate::bench::{
    default_grid, emit_csv, emit_plot_data, monte_carlo, Algorithm, BenchConfig, RunManifest,
    TrialSetting,
};
use crate::ce::{
    solve_ce_optimal, solve_rrce, verify_ce, Objective, DEFAULT_CE_CAP, DEFAULT_FAIRNESS_DELTA,
};
use crate::error::{Error, Result};
use crate::game::{profile_to_distribution, Game, DEFAULT_DENSE_CAP};
use crate::nash::{
    enumerate_pure_nash, find_first_nash, find_nash_random, NashSearchConfig, DEFAULT_ENUM_CAP,
};

/// Seed used when the caller provides none; always echoed in outputs.
pub const DEFAULT_SEED: u64 = 1729;

/// Parses `argv` and runs the selected subcommand, returning the process
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(error) => {
            eprintln!("error: {error}");
            exit_code(&error)
        }
    }
}

fn exit_code(error: &Error) -> i32 {
    match error {
        Error::CapExceeded { .. } => 3,
        Error::Infeasible
        | Error::Unbounded
        | Error::IterationLimit
        | Error::NoEquilibriumFound
        | Error::EmptyNashSet
        | Error::Internal(_) => 4,
        _ => 2,
    }
}

#[derive(Parser)]
#[command(
    name = "polymatrix",
    version,
    about = "Equilibrium solvers for n-player polymatrix matrix games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a game file with one algorithm and write a solution JSON.
    Solve(SolveArgs),
    /// Generate a runway-queue game and write it as a game file.
    GenAtm(GenAtmArgs),
    /// Run the Monte Carlo benchmark sweep and write CSVs plus a manifest.
    Bench(BenchArgs),
    /// Print the linear-equation counts for Nash and CE computation.
    SizeReport(SizeReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Nash,
    Ce,
    RrceRandom,
    RrceBrute,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Algorithm {
        match a {
            AlgoArg::Nash => Algorithm::Nash,
            AlgoArg::Ce => Algorithm::Ce,
            AlgoArg::RrceRandom => Algorithm::RrceRandom,
            AlgoArg::RrceBrute => Algorithm::RrceBrute,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    /// Fairness-threshold criterion with maximin fairness.
    Fairness,
    /// Plain sum of player costs.
    Sum,
}

#[derive(Args)]
struct SolveArgs {
    /// Input game file (JSON: {n, m, costs: [{i, j, matrix}]}).
    #[arg(long)]
    game: PathBuf,
    #[arg(long, value_enum)]
    algo: AlgoArg,
    #[arg(long, value_enum, default_value = "fairness")]
    objective: ObjectiveArg,
    /// Fairness threshold in minutes (fairness objective only).
    #[arg(long, default_value_t = DEFAULT_FAIRNESS_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output solution file.
    #[arg(long)]
    out: PathBuf,
    /// Restart budget for the random Nash search.
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// KKT acceptance tolerance for certified equilibria.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Joint-action cap for the dense CE program.
    #[arg(long, default_value_t = DEFAULT_CE_CAP as u64)]
    ce_cap: u64,
    /// Joint-action cap for pure-equilibrium enumeration.
    #[arg(long, default_value_t = DEFAULT_ENUM_CAP as u64)]
    enum_cap: u64,
    /// Entry cap for dense tensor materialization.
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP as u64)]
    dense_cap: u64,
}

#[derive(Args)]
struct GenAtmArgs {
    /// Number of queues (players).
    #[arg(long)]
    n: Option<usize>,
    /// Number of runways; action count is 2^r.
    #[arg(long)]
    r: Option<u32>,
    /// Explicit comma-separated arrival rates.
    #[arg(long, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
    /// Sample rates uniformly with this seed instead of listing them.
    #[arg(long)]
    rate_seed: Option<u64>,
    #[arg(long)]
    rate_low: Option<f64>,
    #[arg(long)]
    rate_high: Option<f64>,
    /// Yield penalty, minutes.
    #[arg(long)]
    rho: Option<f64>,
    /// Collision penalty, minutes.
    #[arg(long)]
    delta: Option<f64>,
    /// Scenario file; explicit flags override its fields.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output game file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Grid preset; only "default" (n 2..7, r 1..3) is defined.
    #[arg(long, default_value = "default", conflicts_with_all = ["n_range", "r_range"])]
    grid: String,
    /// Inclusive player range "A..B" replacing the preset.
    #[arg(long, requires = "r_range")]
    n_range: Option<String>,
    /// Inclusive runway range "A..B" replacing the preset.
    #[arg(long, requires = "n_range")]
    r_range: Option<String>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output directory for records.csv, plot CSVs, and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
    /// Comma-separated subset of algorithms (default: all four).
    #[arg(long, value_enum, value_delimiter = ',')]
    algos: Option<Vec<AlgoArg>>,
    /// Restart budget for the random Nash search.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Worker threads (default: POLYMATRIX_THREADS env var, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Fairness threshold of the objective, minutes.
    #[arg(long)]
    fairness_delta: Option<f64>,
    #[arg(long)]
    rate_low: Option<f64>,
    #[arg(long)]
    rate_high: Option<f64>,
    #[arg(long)]
    ce_cap: Option<u64>,
    #[arg(long)]
    enum_cap: Option<u64>,
}

#[derive(Args)]
struct SizeReportArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: u32,
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::GenAtm(args) => cmd_gen_atm(args),
        Command::Bench(args) => cmd_bench(args),
        Command::SizeReport(args) => cmd_size_report(args),
    }
}

/// Solution export schema: gamma only for RRCE variants, z only when the
/// dense tensor fits under the cap, violation only when the CE rows could be
/// assembled for re-verification.
#[derive(Serialize)]
struct SolutionExport {
    algorithm: String,
    #[serde(rename = "J")]
    j: f64,
    costs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<Vec<f64>>,
    violation: Option<f64>,
    solver_time_s: f64,
    total_time_s: f64,
    config: SolveConfigEcho,
}

#[derive(Serialize)]
struct SolveConfigEcho {
    objective: String,
    fairness_delta: Option<f64>,
    seed: u64,
    restarts: usize,
    tol: f64,
    ce_cap: u64,
    enum_cap: u64,
    dense_cap: u64,
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let text = fs::read_to_string(&args.game)?;
    let game: Game = serde_json::from_str(&text)?;
    let objective = match args.objective {
        ObjectiveArg::Fairness => Objective::FairnessThreshold { delta: args.delta },
        ObjectiveArg::Sum => Objective::SumOfCosts,
    };
    let search = NashSearchConfig {
        restarts: args.restarts,
        tol: args.tol,
        max_iterations: 10_000,
        dedupe_tol: 1e-4,
    };

    let started = Instant::now();
    let (z, j, costs, gamma, solver_time_s) = match args.algo {
        AlgoArg::Nash => {
            let solve_start = Instant::now();
            let point = find_first_nash(&game, &search, args.seed)?;
            let solver_time_s = solve_start.elapsed().as_secs_f64();
            let costs = crate::game::cost_of_profile(&game, &point.profile);
            let j = objective.evaluate(&costs);
            let z = profile_to_distribution(&game, &point.profile, args.dense_cap as u128).ok();
            (z, j, costs, None, solver_time_s)
        }
        AlgoArg::Ce => {
            let solution = solve_ce_optimal(&game, &objective, args.ce_cap as u128)?;
            (
                Some(solution.z),
                solution.j,
                solution.costs,
                None,
                solution.solver_time_s,
            )
        }
        AlgoArg::RrceRandom | AlgoArg::RrceBrute => {
            let solve_start = Instant::now();
            let nash = if args.algo == AlgoArg::RrceRandom {
                find_nash_random(&game, &search, args.seed)?
            } else {
                let set = enumerate_pure_nash(&game, args.enum_cap as u128)?;
                if set.is_empty() {
                    return Err(Error::NoEquilibriumFound);
                }
                set
            };
            let nash_time = solve_start.elapsed().as_secs_f64();
            let solution = solve_rrce(&game, &nash, &objective)?;
            (
                Some(solution.z),
                solution.j,
                solution.costs,
                Some(solution.gamma),
                nash_time + solution.solver_time_s,
            )
        }
    };
    let total_time_s = started.elapsed().as_secs_f64();

    let violation = z
        .as_ref()
        .and_then(|z| verify_ce(&game, z, args.ce_cap as u128).ok());
    let dense = z.and_then(|z| {
        z.densify(args.dense_cap as u128)
            .ok()
            .map(|d| d.probs().to_vec())
    });

    let export = SolutionExport {
        algorithm: Algorithm::from(args.algo).name().to_string(),
        j,
        costs,
        gamma,
        z: dense,
        violation,
        solver_time_s,
        total_time_s,
        config: SolveConfigEcho {
            objective: match args.objective {
                ObjectiveArg::Fairness => "fairness".into(),
                ObjectiveArg::Sum => "sum".into(),
            },
            fairness_delta: matches!(args.objective, ObjectiveArg::Fairness).then_some(args.delta),
            seed: args.seed,
            restarts: args.restarts,
            tol: args.tol,
            ce_cap: args.ce_cap,
            enum_cap: args.enum_cap,
            dense_cap: args.dense_cap,
        },
    };
    write_json(&args.out, &export)?;
    eprintln!(
        "solved {} with {}: J = {j:.6}, wrote {}",
        args.game.display(),
        Algorithm::from(args.algo).name(),
        args.out.display()
    );
    Ok(())
}

fn cmd_gen_atm(args: GenAtmArgs) -> Result<()> {
    let base = match &args.scenario {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            Some(serde_json::from_str::<AtmScenario>(&text)?)
        }
        None => None,
    };

    // Flags override scenario fields; defaults fill the rest.
    let n = args
        .n
        .or(base.as_ref().map(|s| s.n))
        .ok_or_else(|| Error::InvalidConfig("--n is required without --scenario".into()))?;
    let r = args
        .r
        .or(base.as_ref().map(|s| s.r))
        .ok_or_else(|| Error::InvalidConfig("--r is required without --scenario".into()))?;
    let rho = args
        .rho
        .or(base.as_ref().map(|s| s.rho))
        .unwrap_or(DEFAULT_RHO);
    let delta = args
        .delta
        .or(base.as_ref().map(|s| s.delta))
        .unwrap_or(DEFAULT_DELTA);

    let flag_rates = match (&args.rates, args.rate_seed) {
        (Some(rates), _) => Some(RateSpec::Fixed(rates.clone())),
        (None, Some(seed)) => Some(RateSpec::Sampled {
            seed,
            low: args.rate_low.unwrap_or(crate::atm::DEFAULT_RATE_RANGE.0),
            high: args.rate_high.unwrap_or(crate::atm::DEFAULT_RATE_RANGE.1),
        }),
        (None, None) => None,
    };
    // Without an explicit spec the rates default to 1.0 per queue, the
    // canonical chicken-game normalization.
    let rates = flag_rates
        .or(base.map(|s| s.rates))
        .unwrap_or(RateSpec::Fixed(vec![1.0; n]));

    let scenario = AtmScenario {
        n,
        r,
        rho,
        delta,
        rates,
    };
    let config = scenario.resolve()?;
    let game = build_queue_game(&config)?;
    write_json(&args.out, &game)?;
    eprintln!(
        "wrote {} ({} queues, {} runways, rho = {}, delta = {}, rates = {:?})",
        args.out.display(),
        config.n,
        config.r,
        config.rho,
        config.delta,
        config.rates
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let settings = match (&args.n_range, &args.r_range) {
        (Some(n_range), Some(r_range)) => {
            let (n_lo, n_hi) = parse_range(n_range)?;
            let (r_lo, r_hi) = parse_range(r_range)?;
            let mut grid = Vec::new();
            for n in n_lo..=n_hi {
                for r in r_lo..=r_hi {
                    grid.push(TrialSetting {
                        n: n as usize,
                        r,
                    });
                }
            }
            grid
        }
        _ => {
            if args.grid != "default" {
                return Err(Error::InvalidConfig(format!(
                    "unknown grid preset '{}'",
                    args.grid
                )));
            }
            default_grid()
        }
    };
    if settings.is_empty() {
        return Err(Error::InvalidConfig("empty benchmark grid".into()));
    }

    let algorithms: Vec<Algorithm> = args
        .algos
        .map(|list| list.into_iter().map(Algorithm::from).collect())
        .unwrap_or_else(|| Algorithm::ALL.to_vec());

    let mut cfg = BenchConfig {
        restarts: args.restarts,
        ..BenchConfig::default()
    };
    if let Some(v) = args.rho {
        cfg.rho = v;
    }
    if let Some(v) = args.delta {
        cfg.delta = v;
    }
    if let Some(v) = args.fairness_delta {
        cfg.fairness_delta = v;
    }
    if let Some(v) = args.rate_low {
        cfg.rate_low = v;
    }
    if let Some(v) = args.rate_high {
        cfg.rate_high = v;
    }
    if let Some(v) = args.ce_cap {
        cfg.ce_cap = v as u128;
    }
    if let Some(v) = args.enum_cap {
        cfg.enum_cap = v as u128;
    }

    let threads = args
        .threads
        .or_else(|| {
            std::env::var("POLYMATRIX_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);

    fs::create_dir_all(&args.out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let started = Instant::now();
    let records = pool.install(|| {
        monte_carlo(&settings, args.trials, args.seed, &algorithms, &cfg)
    })?;
    let elapsed = started.elapsed().as_secs_f64();

    emit_csv(&records, &args.out_dir.join("records.csv"))?;
    emit_plot_data(&records, &args.out_dir)?;
    let manifest = RunManifest::new(
        args.seed,
        args.trials,
        settings.clone(),
        algorithms,
        cfg,
        pool.current_num_threads(),
    );
    manifest.write(&args.out_dir.join("manifest.json"))?;
    eprintln!(
        "ran {} settings x {} trials in {elapsed:.1}s, wrote {}",
        settings.len(),
        args.trials,
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_size_report(args: SizeReportArgs) -> Result<()> {
    let (nash, ce) = crate::ce::problem_size_report(args.n, args.m)?;
    println!("nash: {nash}, ce: {ce}");
    Ok(())
}

fn parse_range(text: &str) -> Result<(u32, u32)> {
    let parts: Vec<&str> = text.split("..").collect();
    let err = || Error::InvalidConfig(format!("range '{text}' is not of the form A..B"));
    if parts.len() != 2 {
        return Err(err());
    }
    let lo: u32 = parts[0].trim().parse().map_err(|_| err())?;
    let hi: u32 = parts[1].trim().parse().map_err(|_| err())?;
    if lo > hi {
        return Err(err());
    }
    Ok((lo, hi))
}

fn write_json<T: Serialize>(path: &PathBuf, value: &T) -> Result<()> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("2..7").unwrap(), (2, 7));
        assert_eq!(parse_range("3..3").unwrap(), (3, 3));
        assert!(parse_range("7..2").is_err());
        assert!(parse_range("2-7").is_err());
    }

    #[test]
    fn help_returns_success() {
        assert_eq!(run(["polymatrix", "--help"]), 0);
    }

    #[test]
    fn bad_arguments_return_two() {
        assert_eq!(run(["polymatrix", "solve", "--no-such-flag"]), 2);
        assert_eq!(run(["polymatrix", "nonsense"]), 2);
    }
}
