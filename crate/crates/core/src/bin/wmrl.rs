use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use wmrl::analysis::{performance_by_error_count, replay_simulate, write_reports};
use wmrl::data::{load_sessions, synth_to_file};
use wmrl::fitting::{bic_table, chebyshev_rank, dataset_chain, nsga2_fit, ChebyshevConfig, FitRunConfig, Selected, Solution};
use wmrl::task::{generate_session, MAX_REPETITIONS, MIN_REPETITIONS};
use wmrl::{AgentConfig, Error, Result};

#[derive(Parser)]
#[command(name = "wmrl", version, about = "Fit and simulate working-memory / Q-learning decision models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic session file from an agent configuration.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        problems: usize,
    },
    /// Fit a model with NSGA-II and write its Pareto front.
    Fit {
        /// Fit run configuration.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed of the run configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the replay replicates of the run configuration.
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Pick one solution from a saved front by Chebyshev aggregation.
    Select {
        #[arg(long)]
        front: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = ChebyshevConfig::default().epsilon)]
        epsilon: f64,
    },
    /// Replay an agent on a problem chain and write report tables.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Session file whose problem chain is replayed; a fresh chain is
        /// generated when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 100)]
        problems: usize,
    },
    /// BIC of fitted configurations, next to a random chooser.
    Bic {
        /// An agent configuration, a list of them, or a selected solution.
        #[arg(long)]
        config: Vec<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load a session file and check its invariants.
    Validate {
        #[arg(long)]
        data: PathBuf,
    },
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(File::create(path)?, value)?;
    Ok(())
}

fn agent_config(path: &Path) -> Result<AgentConfig> {
    let cfg: AgentConfig = read_json(path)?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigFile {
    Many(Vec<AgentConfig>),
    One(AgentConfig),
    Selected(Selected),
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { config, out, seed, problems } => {
            let data = synth_to_file(&agent_config(&config)?, problems, seed, &out)?;
            println!("wrote {} trials in {} problems to {}", data.n_trials(), data.n_problems(), out.display());
        }
        Command::Fit { config, data, out, seed, reps } => {
            let mut run: FitRunConfig = read_json(&config)?;
            if let Some(s) = seed {
                run.seed = s;
            }
            if let Some(r) = reps {
                run.replicates = r;
            }
            let data = load_sessions(&data)?;
            let front = nsga2_fit(&run, &data)?;
            write_json(&out, &front)?;
            println!("{} solutions on the front; best negll {:.4}", front.len(), front[0].negll);
        }
        Command::Select { front, out, epsilon } => {
            let front: Vec<Solution> = read_json(&front)?;
            let picked = chebyshev_rank(&front, &ChebyshevConfig { epsilon, ..Default::default() })?;
            println!("{}", serde_json::to_string_pretty(&picked)?);
            if let Some(out) = out {
                write_json(&out, &picked)?;
            }
        }
        Command::Simulate { config, data, out, seed, reps, problems } => {
            let cfg = agent_config(&config)?;
            let chain = match data {
                Some(path) => dataset_chain(&load_sessions(path)?),
                None => generate_session(&mut wmrl::rng::derived_stream(seed, &[0]), problems),
            };
            let replay = replay_simulate(&cfg, &chain, reps, seed, false)?;
            let files = write_reports(&out, &replay.curve, &replay.trace)?;
            for note in &replay.curve.notes {
                println!("note: {note}");
            }
            println!("{}", serde_json::to_string_pretty(&files)?);
        }
        Command::Bic { config, data, out } => {
            let mut configs = Vec::new();
            for path in &config {
                match read_json::<ConfigFile>(path)? {
                    ConfigFile::Many(v) => configs.extend(v),
                    ConfigFile::One(c) => configs.push(c),
                    ConfigFile::Selected(s) => configs.push(s.solution.config()),
                }
            }
            for c in &configs {
                c.validate()?;
            }
            let rows = bic_table(&configs, &load_sessions(&data)?)?;
            println!("{:<22} {:>3} {:>12} {:>12}", "model", "k", "negll", "bic");
            for r in &rows {
                println!("{:<22} {:>3} {:>12.3} {:>12.3}", r.model, r.k, r.negll, r.bic);
            }
            if let Some(out) = out {
                write_json(&out, &rows)?;
            }
        }
        Command::Validate { data } => validate(&data)?,
    }
    Ok(())
}

fn validate(path: &Path) -> Result<()> {
    let data = load_sessions(path)?;
    let mut failures = Vec::new();
    let mut incomplete = 0;
    for s in &data.sessions {
        let problems = s.problems();
        let last = problems.len().saturating_sub(1);
        for (i, p) in problems.iter().enumerate() {
            if p[0].errors_in_search.is_none() {
                incomplete += 1;
                if i != last {
                    failures.push(format!("session {}: problem {} has no rewarded trial", s.id, p[0].problem_index));
                }
                continue;
            }
            let reps = p.iter().filter(|t| t.phase == wmrl::Phase::Repetition && t.rewarded).count() as u32;
            if i != last && !(MIN_REPETITIONS..=MAX_REPETITIONS).contains(&reps) {
                failures.push(format!("session {}: problem {} has {reps} correct repetitions", s.id, p[0].problem_index));
            }
        }
        for row in performance_by_error_count(&problems) {
            if row.repetitions.iter().any(|m| !(0.0..=1.0).contains(&m.mean)) {
                failures.push(format!("session {}: performance outside [0, 1]", s.id));
            }
        }
    }
    println!(
        "{} sessions, {} problems, {} trials, reaction times {}",
        data.sessions.len(),
        data.n_problems(),
        data.n_trials(),
        if data.rt_available { "present" } else { "missing" }
    );
    if incomplete > 0 {
        println!("{incomplete} problem(s) without a rewarded trial");
    }
    if failures.is_empty() {
        println!("ok");
        Ok(())
    } else {
        Err(Error::Validation(failures.join("; ")))
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
