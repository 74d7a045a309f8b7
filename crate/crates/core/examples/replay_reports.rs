//! Replay a gated coordination agent many times on one chain and write the
//! report tables.

use wmrl::analysis::{replay_simulate, write_reports};
use wmrl::task::generate_session;
use wmrl::{rng, AgentConfig};

fn main() -> wmrl::Result<()> {
    let cfg = AgentConfig::from_json(
        r#"{"model": "Coordination", "variation": 7,
            "params": {"alpha": 0.8, "beta": 10, "sigma": 3, "N": 8, "eta": 0.1, "lambda1": 20,
                       "lambda2": 0, "beta_decision": 30, "gamma": 0, "kappa": 0.5, "xi1": -20, "xi2": 0.3}}"#,
    )?;
    let chain = generate_session(&mut rng::stream(1), 60);
    let replay = replay_simulate(&cfg, &chain, 100, 2, false)?;
    for tg in &replay.trace.groups {
        let cells: Vec<String> = tg
            .points
            .iter()
            .map(|p| format!("{:?}{}: ret {:.2} upd {:.2}", p.position.phase, p.position.index, p.retrieved.mean, p.update_probability.mean))
            .collect();
        println!("{} errors | {}", tg.errors, cells.join(" | "));
    }
    let dir = std::env::temp_dir().join("wmrl-reports");
    let files = write_reports(&dir, &replay.curve, &replay.trace)?;
    println!("{files:?}");
    Ok(())
}
