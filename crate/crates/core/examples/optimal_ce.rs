//! The dense correlated-equilibrium program on a three-queue game: assemble
//! the rationality rows, minimize the fairness-threshold objective, and
//! inspect the support of the optimal distribution.
//!
//! Run with: cargo run --release --example optimal_ce

use polymatrix::atm::{build_queue_game, AtmConfig};
use polymatrix::ce::{
    assemble_ce_constraints, solve_ce_optimal, Objective, DEFAULT_CE_CAP,
};
use polymatrix::game::{JointAction, JointDistribution};

fn main() -> polymatrix::Result<()> {
    let cfg = AtmConfig::new(3, 1, vec![1.0, 1.4, 0.6], 5.0, 500.0)?;
    let game = build_queue_game(&cfg)?;
    println!(
        "3 queues, 1 runway, rates {:?}: {} joint actions",
        cfg.rates,
        game.joint_action_count()?
    );

    let system = assemble_ce_constraints(&game, DEFAULT_CE_CAP)?;
    println!(
        "CE system: {} rationality rows + 1 normalization row over {} columns",
        system.rows().len(),
        system.joint_actions()
    );

    let objective = Objective::FairnessThreshold { delta: 5.0 };
    let solution = solve_ce_optimal(&game, &objective, DEFAULT_CE_CAP)?;
    println!(
        "\noptimal CE: J = {:.4}, costs {:?}, re-verified violation {:.2e}",
        solution.j, solution.costs, solution.violation
    );

    let JointDistribution::Dense(dense) = &solution.z else {
        unreachable!("CE solutions are dense")
    };
    println!("\nsupport of z* (Occupy = O, Yield = Y):");
    for (flat, &p) in dense.probs().iter().enumerate() {
        if p > 1e-9 {
            let action = JointAction::from_flat(flat, 3, 2)?;
            let label: String = action
                .actions()
                .iter()
                .map(|&a| if a == 0 { 'O' } else { 'Y' })
                .collect();
            println!("  {label}: {p:.4}");
        }
    }
    Ok(())
}
