//! Generate a problem chain and play it with a fixed guessing order.

use wmrl::task::generate_session;
use wmrl::{rng, Action, Phase, TaskState};

fn main() {
    let chain = generate_session(&mut rng::stream(7), 8);
    for problem in &chain {
        let mut state = TaskState::new(*problem);
        let mut guess = 0;
        let mut trials = 0;
        let mut errors = 0;
        loop {
            let action = Action::new(guess).unwrap();
            let step = state.step(action);
            trials += 1;
            if state.phase == Phase::Search && !step.rewarded {
                errors += 1;
                guess += 1;
            }
            state = step.state;
            if step.problem_ended {
                break;
            }
        }
        println!(
            "problem {}: target {:?}, {errors} errors before the first reward, {trials} trials, {} repeats required",
            problem.index, problem.correct, problem.repetition_length
        );
    }
}
