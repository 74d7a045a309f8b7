//! Session files.
//!
//! One CSV row per trial with the columns `session_id, problem_index,
//! trial_index, phase, chosen_action, reward, rt, correct_action`. `phase` is
//! `S` or `R`, actions are `0..4`, `reward` is `0` or `1` and `rt` may be
//! empty. Rows of a session are contiguous and in trial order.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::error::{Error, Result};
use crate::policy::Action;
use crate::simulate::{simulate_session, DEFAULT_MAX_TRIALS};
use crate::task::{
    generate_session, label_problem, split_problems, Phase, ProblemSpec, TrialRecord, MAX_REPETITIONS,
    MIN_REPETITIONS,
};
use crate::rng;

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    session_id: String,
    problem_index: usize,
    trial_index: usize,
    phase: Phase,
    chosen_action: u8,
    reward: u8,
    rt: Option<f64>,
    correct_action: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Session {
    pub id: String,
    pub trials: Vec<TrialRecord>,
}

impl Session {
    /// Trials grouped by problem.
    pub fn problems(&self) -> Vec<&[TrialRecord]> {
        split_problems(&self.trials, |t| t.problem_index)
    }

    /// The problem chain the session was played on. Repetition lengths are
    /// the observed number of rewarded repetitions, clamped to the task's
    /// range.
    pub fn problem_specs(&self) -> Vec<ProblemSpec> {
        self.problems()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let reps = p.iter().filter(|t| t.phase == Phase::Repetition && t.rewarded).count() as u32;
                ProblemSpec {
                    index: i,
                    correct: p[0].correct,
                    repetition_length: reps.clamp(MIN_REPETITIONS, MAX_REPETITIONS),
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub sessions: Vec<Session>,
    /// Every trial carries a reaction time.
    pub rt_available: bool,
}

impl Dataset {
    pub fn from_sessions(sessions: Vec<Session>) -> Self {
        let rt_available = sessions.iter().flat_map(|s| &s.trials).all(|t| t.rt.is_some());
        let rt_available = rt_available && sessions.iter().any(|s| !s.trials.is_empty());
        Dataset { sessions, rt_available }
    }

    pub fn n_trials(&self) -> usize {
        self.sessions.iter().map(|s| s.trials.len()).sum()
    }

    pub fn n_problems(&self) -> usize {
        self.sessions.iter().map(|s| s.problems().len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.n_trials() == 0
    }
}

fn row_error(path: &Path, row: usize, msg: impl Into<String>) -> Error {
    Error::Row { path: path.to_path_buf(), row, msg: msg.into() }
}

/// Read and validate a session file. Row numbers in errors count the header
/// as row 1.
pub fn load_sessions(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let mut sessions: Vec<Session> = Vec::new();
    // (line, problem start index within the session's trials)
    let mut lines: Vec<Vec<usize>> = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| row_error(path, line, e.to_string()))?;
        let action = Action::try_from(row.chosen_action).map_err(|e| row_error(path, line, e))?;
        let correct = Action::try_from(row.correct_action).map_err(|e| row_error(path, line, e))?;
        let rewarded = match row.reward {
            0 => false,
            1 => true,
            r => return Err(row_error(path, line, format!("reward {r} is not 0 or 1"))),
        };
        if rewarded != (action == correct) {
            return Err(row_error(path, line, "reward contradicts the chosen and correct actions"));
        }
        if let Some(rt) = row.rt {
            if !rt.is_finite() {
                return Err(row_error(path, line, "rt is not finite"));
            }
        }
        if sessions.last().map_or(true, |s| s.id != row.session_id) {
            if sessions.iter().any(|s| s.id == row.session_id) {
                return Err(row_error(path, line, format!("session {} is not contiguous", row.session_id)));
            }
            sessions.push(Session { id: row.session_id.clone(), trials: Vec::new() });
            lines.push(Vec::new());
        }
        let session = sessions.last_mut().expect("pushed above");
        if let Some(prev) = session.trials.last() {
            let same_problem = prev.problem_index == row.problem_index;
            if row.problem_index < prev.problem_index || (same_problem && row.trial_index <= prev.trial_index) {
                return Err(row_error(path, line, "rows are out of order"));
            }
            if same_problem && prev.correct != correct {
                return Err(row_error(path, line, "correct action changes within a problem"));
            }
        }
        session.trials.push(TrialRecord {
            problem_index: row.problem_index,
            trial_index: row.trial_index,
            phase: row.phase,
            action,
            rewarded,
            rt: row.rt,
            correct,
            errors_in_search: None,
        });
        lines.last_mut().expect("pushed above").push(line);
    }

    for (session, lines) in sessions.iter_mut().zip(&lines) {
        let mut start = 0;
        while start < session.trials.len() {
            let key = session.trials[start].problem_index;
            let end = session.trials[start..].iter().position(|t| t.problem_index != key).map_or(session.trials.len(), |k| start + k);
            let problem = &mut session.trials[start..end];
            label_problem(problem);
            let co1 = problem.iter().position(|t| t.rewarded);
            for (k, t) in problem.iter().enumerate() {
                let expected = if co1.map_or(true, |c| k <= c) { Phase::Search } else { Phase::Repetition };
                if t.phase != expected {
                    return Err(row_error(
                        path,
                        lines[start + k],
                        format!("phase {} but the trial is in the {} phase", t.phase.code(), expected.code()),
                    ));
                }
            }
            start = end;
        }
    }
    Ok(Dataset::from_sessions(sessions))
}

/// Write sessions in the file format read by [`load_sessions`].
pub fn write_sessions(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path.as_ref())?);
    if data.sessions.iter().all(|s| s.trials.is_empty()) {
        w.write_record(["session_id", "problem_index", "trial_index", "phase", "chosen_action", "reward", "rt", "correct_action"])?;
    }
    for s in &data.sessions {
        for t in &s.trials {
            w.serialize(Row {
                session_id: s.id.clone(),
                problem_index: t.problem_index,
                trial_index: t.trial_index,
                phase: t.phase,
                chosen_action: t.action.into(),
                reward: t.rewarded as u8,
                rt: t.rt,
                correct_action: t.correct.into(),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Generate a synthetic session of `n_problems` problems from a model. The
/// result is fully determined by `seed`.
pub fn synth_generate(cfg: &AgentConfig, n_problems: usize, seed: u64) -> Result<Dataset> {
    let problems = generate_session(&mut rng::derived_stream(seed, &[0]), n_problems);
    let trials = simulate_session(cfg, &problems, rng::derive_seed(seed, &[1]), DEFAULT_MAX_TRIALS)?;
    let session = Session { id: "synth".to_string(), trials: trials.into_iter().map(|t| t.record).collect() };
    let sessions = if session.trials.is_empty() { Vec::new() } else { vec![session] };
    Ok(Dataset::from_sessions(sessions))
}

/// [`synth_generate`] and write the result to `out`.
pub fn synth_to_file(cfg: &AgentConfig, n_problems: usize, seed: u64, out: impl Into<PathBuf>) -> Result<Dataset> {
    let data = synth_generate(cfg, n_problems, seed)?;
    write_sessions(out.into(), &data)?;
    Ok(data)
}
