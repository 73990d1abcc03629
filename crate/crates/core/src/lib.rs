//! Equilibrium solvers for n-player polymatrix matrix games.
//!
//! A polymatrix game gives every player `m` actions and decomposes costs
//! into pairwise bilinear terms `x_i^T C^{ij} x_j`. This crate computes:
//!
//! - **Nash equilibria** — random-restart best-response search certified by
//!   a KKT residual ([`nash::find_nash_random`]), and exhaustive pure-
//!   equilibrium enumeration ([`nash::enumerate_pure_nash`]);
//! - **Optimal correlated equilibria** — a linear program over all `m^n`
//!   joint actions ([`ce::solve_ce_optimal`]), solved with the built-in
//!   two-phase simplex ([`lp::simplex_solve`]);
//! - **Reduced-rank correlated equilibria** — the convex hull of Nash
//!   product distributions ([`ce::solve_rrce`]), which approximates the CE
//!   set while touching only `O(d n^2 m^2)` numbers instead of `m^n`, so it
//!   scales to games the dense program cannot represent.
//!
//! The [`atm`] module generates runway-queue coordination games (queues
//! choose, per runway, to occupy or yield), and [`bench`] runs the Monte
//! Carlo study comparing the four algorithms on fairness (Gini index),
//! average delay cost, and computation time.
//!
//! # Quick start
//!
//! ```
//! use polymatrix::atm::two_player_single_runway;
//! use polymatrix::ce::{solve_ce_optimal, solve_rrce, Objective, DEFAULT_CE_CAP};
//! use polymatrix::nash::{enumerate_pure_nash, DEFAULT_ENUM_CAP};
//!
//! let game = two_player_single_runway(500.0, 5.0)?;
//! let objective = Objective::FairnessThreshold { delta: 5.0 };
//!
//! // Two pure equilibria: one queue occupies, the other yields.
//! let nash = enumerate_pure_nash(&game, DEFAULT_ENUM_CAP)?;
//! assert_eq!(nash.len(), 2);
//!
//! // The hull of those equilibria attains the CE optimum here.
//! let ce = solve_ce_optimal(&game, &objective, DEFAULT_CE_CAP)?;
//! let rrce = solve_rrce(&game, &nash, &objective)?;
//! assert!((ce.j - rrce.j).abs() < 1e-6);
//! # Ok::<(), polymatrix::Error>(())
//! ```
//!
//! # Runnable examples
//!
//! Each major capability has a runnable example under `examples/`:
//!
//! - `chicken` — the two-queue, one-runway game end to end
//! - `find_nash` — certified random-restart search on a random game
//! - `optimal_ce` — the dense CE program with the fairness objective
//! - `rrce_hull` — hull weights over enumerated equilibria vs. the CE value
//! - `runway_queues` — multi-runway cost matrices and their equilibria
//! - `scaling` — 2^21 joint actions: RRCE solves, dense CE refuses
//! - `bench_sweep` — a small Monte Carlo sweep writing the CSV outputs
//!
//! Run one with `cargo run --release --example chicken`.
//!
//! The `polymatrix` binary wraps the same functionality as `solve`,
//! `gen-atm`, `bench`, and `size-report` subcommands.

pub mod atm;
pub mod bench;
pub mod ce;
pub mod cli;
pub mod error;
pub mod game;
pub mod lp;
pub mod nash;
pub mod seeding;

pub use error::{Error, Result};
pub use game::{Game, JointAction, JointDistribution, Strategy, StrategyProfile};
pub use nash::{NashPoint, NashSet};
