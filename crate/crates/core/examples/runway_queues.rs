//! Multi-runway queue games: the bitmask action space, the generated cost
//! matrices, and sampling a recommendation from a coordinated solution.
//!
//! Run with: cargo run --release --example runway_queues

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use polymatrix::atm::{build_queue_game, runway_action_space, AtmConfig, RunwayChoice};
use polymatrix::ce::{solve_rrce, Objective};
use polymatrix::nash::{enumerate_pure_nash, DEFAULT_ENUM_CAP};

fn label(choices: &[RunwayChoice]) -> String {
    choices
        .iter()
        .map(|c| match c {
            RunwayChoice::Occupy => 'O',
            RunwayChoice::Yield => 'Y',
        })
        .collect()
}

fn main() -> polymatrix::Result<()> {
    // With two runways each queue picks occupy/yield per runway: 4 actions.
    let actions = runway_action_space(2);
    println!(
        "action space for r = 2: {:?}",
        actions.iter().map(|a| label(a)).collect::<Vec<_>>()
    );

    let cfg = AtmConfig::new(2, 2, vec![1.0, 1.0], 5.0, 500.0)?;
    let game = build_queue_game(&cfg)?;
    println!("\ncost matrix C^(0,1) with unit rate (rows/cols in action order):");
    for a in 0..cfg.num_actions() {
        let row: Vec<String> = (0..cfg.num_actions())
            .map(|b| format!("{:6.0}", game.cost(0, 1, a, b)))
            .collect();
        println!("  {} | {}", label(&actions[a]), row.join(" "));
    }

    // Each runway ends up claimed by exactly one queue in a pure equilibrium.
    let nash = enumerate_pure_nash(&game, DEFAULT_ENUM_CAP)?;
    println!("\npure equilibria ({}):", nash.len());
    for point in nash.points() {
        let labels: Vec<String> = point
            .profile
            .strategies()
            .iter()
            .map(|s| label(&actions[s.probs().iter().position(|&v| v > 0.5).unwrap()]))
            .collect();
        println!("  {labels:?}");
    }

    // A coordinator samples one recommendation per round from the mixture.
    let rrce = solve_rrce(&game, &nash, &Objective::FairnessThreshold { delta: 5.0 })?;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    println!("\nfive sampled recommendations from the optimal mixture:");
    for round in 1..=5 {
        let joint = rrce.z.sample(&mut rng);
        let labels: Vec<String> = joint.actions().iter().map(|&a| label(&actions[a])).collect();
        println!("  round {round}: {labels:?}");
    }
    Ok(())
}
