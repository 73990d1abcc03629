//! Reduced-rank correlated equilibria: optimize hull weights over the pure
//! equilibria of a multi-queue game and measure the gap to the dense CE
//! optimum.
//!
//! Run with: cargo run --release --example rrce_hull

use polymatrix::atm::{build_queue_game, AtmConfig};
use polymatrix::ce::{solve_ce_optimal, solve_rrce, verify_ce, Objective, DEFAULT_CE_CAP};
use polymatrix::nash::{enumerate_pure_nash, DEFAULT_ENUM_CAP};

fn main() -> polymatrix::Result<()> {
    let cfg = AtmConfig::new(3, 2, vec![0.8, 1.1, 1.7], 5.0, 500.0)?;
    let game = build_queue_game(&cfg)?;
    println!(
        "3 queues, 2 runways, rates {:?}: {} joint actions\n",
        cfg.rates,
        game.joint_action_count()?
    );

    // Phase 1: every pure equilibrium (each runway claimed by one queue).
    let nash = enumerate_pure_nash(&game, DEFAULT_ENUM_CAP)?;
    println!("{} pure equilibria found by enumeration", nash.len());

    // Phase 2: the weight program over the hull.
    let objective = Objective::FairnessThreshold { delta: 5.0 };
    let rrce = solve_rrce(&game, &nash, &objective)?;
    println!("RRCE: J = {:.4}, costs {:?}", rrce.j, rrce.costs);
    println!("hull weights above 1e-6:");
    for (k, &g) in rrce.gamma.iter().enumerate() {
        if g > 1e-6 {
            let actions: Vec<usize> = nash.points()[k]
                .profile
                .strategies()
                .iter()
                .map(|s| s.probs().iter().position(|&v| v > 0.5).unwrap())
                .collect();
            println!("  gamma[{k}] = {g:.4} on pure profile {actions:?}");
        }
    }

    // The mixture is itself a correlated equilibrium.
    let violation = verify_ce(&game, &rrce.z, DEFAULT_CE_CAP)?;
    println!("\nmixture verified against all CE rows: max violation {violation:.2e}");

    // Reference: the dense CE optimum over all joint actions.
    let ce = solve_ce_optimal(&game, &objective, DEFAULT_CE_CAP)?;
    println!(
        "dense CE: J = {:.4} -> hull gap {:.3e} ({:.4}% relative)",
        ce.j,
        rrce.j - ce.j,
        100.0 * (rrce.j - ce.j) / ce.j.abs().max(1e-12)
    );
    Ok(())
}
