//! Running an agent through a chain of problems.

use rand::Rng;

use crate::agent::{Agent, AgentConfig, Decision};
use crate::coordination::{meta_learn, EntropyLog, TrialType};
use crate::error::Result;
use crate::rng;
use crate::task::{label_problem, ProblemSpec, TaskState, TrialRecord};

/// Trials allowed per problem before the simulation gives up on it.
pub const DEFAULT_MAX_TRIALS: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub struct SimTrial {
    pub record: TrialRecord,
    pub decision: Decision,
    pub encoded: bool,
    pub trial_type: TrialType,
}

/// Play `problems` in order with a fresh agent. A problem is abandoned after
/// `max_trials`; its trials keep `errors_in_search = None` if no reward came.
pub fn run_agent<R: Rng + ?Sized>(
    agent: &mut Agent,
    problems: &[ProblemSpec],
    rng: &mut R,
    max_trials: usize,
) -> Vec<SimTrial> {
    let mut out = Vec::new();
    for spec in problems {
        agent.on_new_problem();
        let start = out.len();
        let mut state = TaskState::new(*spec);
        for t in 0..max_trials {
            let trial_type = agent.trial_type();
            let decision = agent.decide(rng);
            let step = state.step(decision.action);
            let record = TrialRecord {
                problem_index: spec.index,
                trial_index: t,
                phase: state.phase,
                action: decision.action,
                rewarded: step.rewarded,
                rt: Some(decision.rt),
                correct: spec.correct,
                errors_in_search: None,
            };
            let obs = agent.observe(decision.action, step.rewarded);
            out.push(SimTrial { record, decision, encoded: obs.encoded, trial_type });
            state = step.state;
            if step.problem_ended {
                break;
            }
        }
        let mut records: Vec<TrialRecord> = out[start..].iter().map(|s| s.record.clone()).collect();
        label_problem(&mut records);
        for (s, r) in out[start..].iter_mut().zip(records) {
            s.record.errors_in_search = r.errors_in_search;
        }
    }
    out
}

/// Simulate a session from a configuration. Meta-learning variations first
/// play the same problems without the entropy bias to learn mean entropies.
pub fn simulate_session(cfg: &AgentConfig, problems: &[ProblemSpec], seed: u64, max_trials: usize) -> Result<Vec<SimTrial>> {
    let mut agent = Agent::new(cfg)?;
    if agent.flags().meta {
        let mut warmup = Agent::new(cfg)?;
        let trials = run_agent(&mut warmup, problems, &mut rng::derived_stream(seed, &[0]), max_trials);
        let logs: Vec<EntropyLog> = trials
            .iter()
            .map(|t| EntropyLog { trial_type: t.trial_type, h_bwm: t.decision.h_bwm, h_ql: t.decision.h_ql })
            .collect();
        agent.set_meta_table(meta_learn(&logs, agent.granularity()));
    }
    Ok(run_agent(&mut agent, problems, &mut rng::derived_stream(seed, &[1]), max_trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{ModelKind, Param, ParamVector};
    use crate::task::{generate_session, Phase, MIN_REPETITIONS};

    #[test]
    fn problems_end_after_their_repetitions() {
        let params = ParamVector::new()
            .with(Param::Capacity, 6.0)
            .with(Param::Theta, 0.1)
            .with(Param::Sigma, 1.0)
            .with(Param::Eta, 0.0);
        let cfg = AgentConfig::new(ModelKind::WorkingMemory, 1, params);
        let problems = generate_session(&mut rng::stream(1), 20);
        let trials = simulate_session(&cfg, &problems, 7, DEFAULT_MAX_TRIALS).unwrap();
        for p in crate::task::split_problems(&trials, |t| t.record.problem_index) {
            let spec = &problems[p[0].record.problem_index];
            let reps = p.iter().filter(|t| t.record.phase == Phase::Repetition && t.record.rewarded).count();
            assert_eq!(reps as u32, spec.repetition_length);
            assert!(reps as u32 >= MIN_REPETITIONS);
            let co1 = p.iter().position(|t| t.record.rewarded).unwrap();
            assert!(p.iter().all(|t| t.record.errors_in_search == Some(co1 as u32)));
            // a noiseless memory with a low threshold never errs after CO1
            assert_eq!(p.len(), co1 + 1 + reps);
        }
    }

    #[test]
    fn simulation_is_reproducible() {
        let params = ParamVector::new().with(Param::Alpha, 0.3).with(Param::Beta, 3.0).with(Param::Sigma, 1.0);
        let cfg = AgentConfig::new(ModelKind::QLearning, 1, params);
        let problems = generate_session(&mut rng::stream(2), 5);
        let a = simulate_session(&cfg, &problems, 3, 50).unwrap();
        let b = simulate_session(&cfg, &problems, 3, 50).unwrap();
        assert_eq!(a, b);
    }
}
