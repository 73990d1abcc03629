//! End-to-end tests of the `polymatrix` binary: subcommand contracts, file
//! round trips, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use polymatrix::game::Game;

fn polymatrix(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polymatrix"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn size_report_prints_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = polymatrix(&["size-report", "--n", "2", "--m", "2"], dir.path());
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "nash: 6, ce: 33");

    let out = polymatrix(&["size-report", "--n", "7", "--m", "8"], dir.path());
    assert_eq!(stdout(&out).trim(), "nash: 63, ce: 4195649");
}

#[test]
fn gen_atm_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = polymatrix(
        &["gen-atm", "--n", "3", "--r", "2", "--rate-seed", "11", "--out", "game.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(dir.path().join("game.json")).unwrap();
    let game: Game = serde_json::from_str(&text).unwrap();
    assert_eq!(game.num_players(), 3);
    assert_eq!(game.num_actions(), 4);

    // Writing the parsed game again reproduces an identical game.
    let again = serde_json::to_string(&game).unwrap();
    let back: Game = serde_json::from_str(&again).unwrap();
    assert_eq!(game, back);
    assert_eq!(game.fingerprint(), back.fingerprint());
}

#[test]
fn gen_then_solve_chain_hits_known_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = polymatrix(
        &["gen-atm", "--n", "2", "--r", "1", "--out", "chicken.json"],
        dir.path(),
    );
    assert!(out.status.success());

    let out = polymatrix(
        &[
            "solve",
            "--game",
            "chicken.json",
            "--algo",
            "rrce-brute",
            "--out",
            "solution.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let solution: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("solution.json")).unwrap())
            .unwrap();
    assert_eq!(solution["algorithm"], "rrce-brute");
    let j = solution["J"].as_f64().unwrap();
    assert!((j - 5.0).abs() <= 1e-6, "J = {j}");
    assert!(solution["gamma"].is_array());
    assert!(solution["z"].is_array());
    let violation = solution["violation"].as_f64().unwrap();
    assert!(violation <= 1e-8);
    assert_eq!(solution["config"]["seed"].as_u64(), Some(1729));

    // Nash solve on the same file also works and echoes no gamma.
    let out = polymatrix(
        &[
            "solve",
            "--game",
            "chicken.json",
            "--algo",
            "nash",
            "--seed",
            "3",
            "--out",
            "nash.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let solution: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("nash.json")).unwrap())
            .unwrap();
    assert!(solution.get("gamma").is_none());
}

#[test]
fn ce_above_cap_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = polymatrix(
        &["gen-atm", "--n", "7", "--r", "3", "--out", "big.json"],
        dir.path(),
    );
    assert!(out.status.success());

    let out = polymatrix(
        &[
            "solve",
            "--game",
            "big.json",
            "--algo",
            "ce",
            "--out",
            "unused.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_pure_equilibrium_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    // Matching pennies: no pure equilibrium exists.
    let game = Game::from_pair_matrices(
        2,
        2,
        [
            (0usize, 1usize, vec![0.0, 1.0, 1.0, 0.0]),
            (1usize, 0usize, vec![1.0, 0.0, 0.0, 1.0]),
        ],
    )
    .unwrap();
    std::fs::write(
        dir.path().join("pennies.json"),
        serde_json::to_string(&game).unwrap(),
    )
    .unwrap();

    let out = polymatrix(
        &[
            "solve",
            "--game",
            "pennies.json",
            "--algo",
            "rrce-brute",
            "--out",
            "unused.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bad_arguments_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = polymatrix(&["solve", "--algo", "warp-drive"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = polymatrix(
        &["solve", "--game", "missing.json", "--algo", "ce", "--out", "x.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = polymatrix(
        &[
            "bench",
            "--n-range",
            "2..2",
            "--r-range",
            "1..1",
            "--trials",
            "2",
            "--seed",
            "7",
            "--out-dir",
            "run",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let records = std::fs::read_to_string(dir.path().join("run/records.csv")).unwrap();
    let lines: Vec<&str> = records.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 4); // header + 2 trials x 4 algorithms
    assert!(lines[0].starts_with("n,r,m,joint_actions,trial,algorithm,status,"));

    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("run/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["base_seed"].as_u64(), Some(7));
    assert_eq!(manifest["trials_per_setting"].as_u64(), Some(2));
    assert!(manifest["quartile_convention"].as_str().unwrap().contains("type-7"));

    assert!(dir.path().join("run/plot_time.csv").exists());
    assert!(dir.path().join("run/plot_quality.csv").exists());
}
