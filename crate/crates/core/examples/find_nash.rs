//! Certified random-restart Nash search on a random polymatrix game.
//!
//! Every returned point carries a KKT residual certificate; restarts draw
//! from seeds derived per index, so the run is reproducible.
//!
//! Run with: cargo run --release --example find_nash

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polymatrix::game::{cost_of_profile, Game};
use polymatrix::nash::{find_nash_random, NashSearchConfig};

fn main() -> polymatrix::Result<()> {
    let (n, m) = (3, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let game = Game::from_cost_fn(n, m, |_, _, _, _| rng.random_range(-5.0..5.0))?;
    println!("random {n}-player game with {m} actions per player");

    let cfg = NashSearchConfig {
        restarts: 40,
        ..NashSearchConfig::default()
    };
    let set = find_nash_random(&game, &cfg, 2024)?;
    println!(
        "{} distinct certified equilibria from {} restarts (tol {:.0e}):\n",
        set.len(),
        cfg.restarts,
        cfg.tol
    );
    for (k, point) in set.points().iter().enumerate() {
        let costs = cost_of_profile(&game, &point.profile);
        println!(
            "equilibrium {k}: pure = {}, residual = {:.2e}, costs = {:?}",
            point.is_pure, point.kkt_residual, costs
        );
        for (i, strategy) in point.profile.strategies().iter().enumerate() {
            let probs: Vec<String> = strategy.probs().iter().map(|p| format!("{p:.4}")).collect();
            println!("  player {i}: [{}]", probs.join(", "));
        }
    }
    Ok(())
}
