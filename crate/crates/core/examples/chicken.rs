//! The two-queue, single-runway chicken game end to end: enumerate the pure
//! equilibria, certify the mixed one, and compare the uncoordinated Nash
//! outcome against the optimal correlated equilibrium and its hull
//! approximation.
//!
//! Run with: cargo run --release --example chicken

use polymatrix::atm::two_player_single_runway;
use polymatrix::bench::{avg_cost, gini};
use polymatrix::ce::{solve_ce_optimal, solve_rrce, Objective, DEFAULT_CE_CAP};
use polymatrix::game::{cost_of_profile, Strategy, StrategyProfile};
use polymatrix::nash::{enumerate_pure_nash, kkt_residual, DEFAULT_ENUM_CAP};

fn main() -> polymatrix::Result<()> {
    let delta = 500.0;
    let rho = 5.0;
    let game = two_player_single_runway(delta, rho)?;
    println!("cost matrix per pair: [[{delta}, 0], [{rho}, {rho}]] (Occupy, Yield)\n");

    // Pure equilibria: one queue occupies while the other yields.
    let nash = enumerate_pure_nash(&game, DEFAULT_ENUM_CAP)?;
    println!("pure Nash equilibria ({}):", nash.len());
    for point in nash.points() {
        let costs = cost_of_profile(&game, &point.profile);
        println!(
            "  strategies {:?} -> costs {costs:?}, KKT residual {}",
            point
                .profile
                .strategies()
                .iter()
                .map(|s| s.probs().to_vec())
                .collect::<Vec<_>>(),
            point.kkt_residual
        );
    }

    // The mixed equilibrium occupies with probability rho / delta.
    let p = rho / delta;
    let mixed = StrategyProfile::new(vec![
        Strategy::new(vec![p, 1.0 - p])?,
        Strategy::new(vec![p, 1.0 - p])?,
    ])?;
    let (residual, _) = kkt_residual(&game, &mixed);
    let mixed_costs = cost_of_profile(&game, &mixed);
    println!("\nmixed equilibrium p(Occupy) = {p}: residual {residual:.2e}, costs {mixed_costs:?}");

    // A lone equilibrium is unfair: one queue pays everything.
    let lone = &nash.points()[0];
    let lone_costs = cost_of_profile(&game, &lone.profile);
    println!(
        "\nuncoordinated play at one equilibrium: AC {}, GI {}",
        avg_cost(&lone_costs),
        gini(&lone_costs)
    );

    // Coordination: the optimal CE and the hull of the pure equilibria.
    let objective = Objective::FairnessThreshold { delta: 5.0 };
    let ce = solve_ce_optimal(&game, &objective, DEFAULT_CE_CAP)?;
    println!(
        "optimal CE: J = {}, costs {:?}, AC {}, GI {}",
        ce.j,
        ce.costs,
        avg_cost(&ce.costs),
        gini(&ce.costs)
    );

    let rrce = solve_rrce(&game, &nash, &objective)?;
    println!(
        "hull RRCE:  J = {}, gamma {:?}, AC {}, GI {}",
        rrce.j,
        rrce.gamma,
        avg_cost(&rrce.costs),
        gini(&rrce.costs)
    );
    println!("\nhull gap J_rrce - J_ce = {:.2e}", rrce.j - ce.j);
    Ok(())
}
