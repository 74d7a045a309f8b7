//! The four-target problem-solving task.
//!
//! A problem has one rewarded target. The search phase lasts until the first
//! rewarded trial (CO1); the repetition phase then asks for
//! `repetition_length` further correct choices. Incorrect repetition trials
//! are recorded but do not advance the counter. When a problem ends the target
//! moves to one of the other three with probability 0.9.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{Action, N_ACTIONS};

pub const CHANGE_PROBABILITY: f64 = 0.9;
pub const MIN_REPETITIONS: u32 = 3;
pub const MAX_REPETITIONS: u32 = 11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "S")]
    Search,
    #[serde(rename = "R")]
    Repetition,
}

impl Phase {
    pub fn code(self) -> &'static str {
        match self {
            Phase::Search => "S",
            Phase::Repetition => "R",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub index: usize,
    pub correct: Action,
    pub repetition_length: u32,
}

impl ProblemSpec {
    pub fn new(index: usize, correct: Action, repetition_length: u32) -> Result<Self> {
        if !(MIN_REPETITIONS..=MAX_REPETITIONS).contains(&repetition_length) {
            return Err(Error::validation(format!(
                "repetition length {repetition_length} outside {MIN_REPETITIONS}..={MAX_REPETITIONS}"
            )));
        }
        Ok(ProblemSpec { index, correct, repetition_length })
    }

    /// Draw the next problem. Without a previous target the new one is
    /// uniform; otherwise it changes with probability 0.9, uniformly to one of
    /// the three other targets.
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, previous: Option<Action>, index: usize) -> Self {
        let correct = match previous {
            None => Action::ALL[rng.gen_range(0..N_ACTIONS)],
            Some(prev) => {
                if rng.gen::<f64>() < CHANGE_PROBABILITY {
                    let k = rng.gen_range(0..N_ACTIONS - 1);
                    let others = Action::ALL.iter().copied().filter(|&a| a != prev);
                    others.clone().nth(k).expect("three other targets")
                } else {
                    prev
                }
            }
        };
        let repetition_length = rng.gen_range(MIN_REPETITIONS..=MAX_REPETITIONS);
        ProblemSpec { index, correct, repetition_length }
    }
}

/// A chain of problems obeying the change rule.
pub fn generate_session<R: Rng + ?Sized>(rng: &mut R, n_problems: usize) -> Vec<ProblemSpec> {
    let mut chain: Vec<ProblemSpec> = Vec::with_capacity(n_problems);
    for i in 0..n_problems {
        let prev = chain.last().map(|p| p.correct);
        chain.push(ProblemSpec::draw(rng, prev, i));
    }
    chain
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TaskState {
    pub problem: ProblemSpec,
    pub phase: Phase,
    pub trial_in_phase: u32,
    pub correct_repeats: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub rewarded: bool,
    pub state: TaskState,
    pub problem_ended: bool,
}

impl TaskState {
    pub fn new(problem: ProblemSpec) -> Self {
        TaskState { problem, phase: Phase::Search, trial_in_phase: 0, correct_repeats: 0 }
    }

    pub fn step(&self, action: Action) -> Step {
        let rewarded = action == self.problem.correct;
        let mut next = *self;
        let mut ended = false;
        match self.phase {
            Phase::Search if rewarded => {
                next.phase = Phase::Repetition;
                next.trial_in_phase = 0;
            }
            Phase::Search => next.trial_in_phase += 1,
            Phase::Repetition => {
                next.trial_in_phase += 1;
                if rewarded {
                    next.correct_repeats += 1;
                    ended = next.correct_repeats >= self.problem.repetition_length;
                }
            }
        }
        Step { rewarded, state: next, problem_ended: ended }
    }
}

/// One observed or simulated trial.
///
/// CO1 is labelled [`Phase::Search`]: the phase switches after its outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub problem_index: usize,
    pub trial_index: usize,
    pub phase: Phase,
    pub action: Action,
    pub rewarded: bool,
    pub rt: Option<f64>,
    pub correct: Action,
    /// Incorrect search trials before CO1; `None` until the problem has a CO1.
    pub errors_in_search: Option<u32>,
}

impl TrialRecord {
    pub fn reward(&self) -> f64 {
        if self.rewarded {
            1.0
        } else {
            0.0
        }
    }
}

/// Fill `errors_in_search` for the trials of one problem.
pub fn label_problem(trials: &mut [TrialRecord]) {
    let co1 = trials.iter().position(|t| t.rewarded);
    let errors = co1.map(|i| i as u32);
    for t in trials.iter_mut() {
        t.errors_in_search = errors;
    }
}

/// Split a trial list into contiguous runs sharing a problem index.
pub fn split_problems<T, F>(trials: &[T], key: F) -> Vec<&[T]>
where
    F: Fn(&T) -> usize,
{
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=trials.len() {
        if i == trials.len() || key(&trials[i]) != key(&trials[start]) {
            if i > start {
                out.push(&trials[start..i]);
            }
            start = i;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn a(i: usize) -> Action {
        Action::new(i).unwrap()
    }

    #[test]
    fn first_problem_is_uniform() {
        let mut r = rng::stream(11);
        let mut counts = [0usize; 4];
        for _ in 0..20_000 {
            counts[ProblemSpec::draw(&mut r, None, 0).correct.index()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 20_000.0 - 0.25).abs() < 0.015, "{counts:?}");
        }
    }

    #[test]
    fn change_rule_keeps_target_ten_percent_of_the_time() {
        let mut r = rng::stream(5);
        let mut counts = [0usize; 4];
        let n = 10_000;
        for _ in 0..n {
            counts[ProblemSpec::draw(&mut r, Some(a(2)), 1).correct.index()] += 1;
        }
        let stay = counts[2] as f64 / n as f64;
        assert!((stay - 0.10).abs() <= 0.01, "stay fraction {stay}");
        // the change branch splits evenly over the other three
        let moved = (n - counts[2]) as f64;
        for i in [0, 1, 3] {
            assert!((counts[i] as f64 / moved - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn repetition_length_in_range() {
        let mut r = rng::stream(8);
        for p in generate_session(&mut r, 2000) {
            assert!((3..=11).contains(&p.repetition_length));
        }
        assert!(ProblemSpec::new(0, a(0), 2).is_err());
        assert!(ProblemSpec::new(0, a(0), 12).is_err());
    }

    #[test]
    fn session_generation_is_deterministic() {
        let x = generate_session(&mut rng::stream(42), 50);
        let y = generate_session(&mut rng::stream(42), 50);
        assert_eq!(x, y);
        assert_eq!(generate_session(&mut rng::stream(1), 1).len(), 1);
        assert!(x.iter().enumerate().all(|(i, p)| p.index == i));
    }

    #[test]
    fn change_count_over_a_long_session() {
        let chain = generate_session(&mut rng::stream(2024), 1000);
        let changes = chain.windows(2).filter(|w| w[0].correct != w[1].correct).count();
        // 999 transitions, mean 899.1, sd ~9.5
        assert!((changes as i64 - 900).abs() <= 30, "changes {changes}");
    }

    #[test]
    fn step_search_and_repetition() {
        let p = ProblemSpec::new(0, a(1), 3).unwrap();
        let s = TaskState::new(p);
        let miss = s.step(a(0));
        assert!(!miss.rewarded);
        assert_eq!(miss.state.phase, Phase::Search);
        let hit = miss.state.step(a(1));
        assert!(hit.rewarded);
        assert_eq!(hit.state.phase, Phase::Repetition);
        assert!(!hit.problem_ended);

        let mut st = hit.state;
        // an error during repetition does not count
        let err = st.step(a(2));
        assert!(!err.rewarded && !err.problem_ended);
        st = err.state;
        for k in 1..=3 {
            let out = st.step(a(1));
            assert!(out.rewarded);
            assert_eq!(out.problem_ended, k == 3);
            st = out.state;
        }
    }

    #[test]
    fn split_problems_groups_contiguous_runs() {
        let xs = [0usize, 0, 1, 1, 1, 2];
        let parts = split_problems(&xs, |x| *x);
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[1], &[1, 1, 1]);
        assert!(split_problems::<usize, _>(&[], |x| *x).is_empty());
    }

    fn play(problem: ProblemSpec, actions: &[usize]) -> Vec<TrialRecord> {
        let mut st = TaskState::new(problem);
        let mut out = Vec::new();
        for (t, &ai) in actions.iter().enumerate() {
            let act = a(ai);
            let step = st.step(act);
            out.push(TrialRecord {
                problem_index: 0,
                trial_index: t,
                phase: st.phase,
                action: act,
                rewarded: step.rewarded,
                rt: None,
                correct: problem.correct,
                errors_in_search: None,
            });
            st = step.state;
            if step.problem_ended {
                break;
            }
        }
        label_problem(&mut out);
        out
    }

    proptest! {
        #[test]
        fn exactly_one_co1_which_is_the_first_reward(
            correct in 0usize..4,
            len in 3u32..=11,
            actions in proptest::collection::vec(0usize..4, 1..60),
        ) {
            let p = ProblemSpec::new(0, a(correct), len).unwrap();
            let trials = play(p, &actions);
            let first_reward = trials.iter().position(|t| t.rewarded);
            let search: Vec<_> = trials.iter().filter(|t| t.phase == Phase::Search).collect();
            match first_reward {
                Some(i) => {
                    // CO1 is the last search-labelled trial
                    prop_assert_eq!(search.len(), i + 1);
                    prop_assert!(search.last().unwrap().rewarded);
                    prop_assert_eq!(search.iter().filter(|t| t.rewarded).count(), 1);
                    prop_assert_eq!(trials[0].errors_in_search, Some(search.len() as u32 - 1));
                }
                None => {
                    prop_assert_eq!(search.len(), trials.len());
                    prop_assert_eq!(trials[0].errors_in_search, None);
                }
            }
            for t in &trials {
                prop_assert_eq!(t.rewarded, t.action == t.correct);
            }
        }
    }
}
