//! Write a synthetic session file, read it back and summarize it.

use wmrl::analysis::performance_by_error_count;
use wmrl::data::{load_sessions, synth_to_file};
use wmrl::AgentConfig;

fn main() -> wmrl::Result<()> {
    let cfg = AgentConfig::from_json(
        r#"{"model": "BWM", "variation": 1, "params": {"N": 5, "theta": 0.6, "sigma": 1.2, "eta": 0.1}}"#,
    )?;
    let path = std::env::temp_dir().join("wmrl-synthetic.csv");
    synth_to_file(&cfg, 60, 42, &path)?;
    let data = load_sessions(&path)?;
    println!("{} trials in {} problems written to {}", data.n_trials(), data.n_problems(), path.display());
    for row in performance_by_error_count(&data.sessions[0].problems()) {
        let means: Vec<String> = row.repetitions.iter().map(|m| format!("{:.2}", m.mean)).collect();
        println!("{} errors: {:>4.1}% of problems, repetition performance {}", row.errors, 100.0 * row.density, means.join(" "));
    }
    Ok(())
}
