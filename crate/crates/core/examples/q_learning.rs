//! A single-state Q-learner facing one fixed target.

use wmrl::qlearning::QTable;
use wmrl::{rng, Action};

fn main() {
    let target = Action::new(2).unwrap();
    let mut r = rng::stream(4);
    let mut q = QTable::new();
    for trial in 0..10 {
        let p = q.softmax(5.0);
        let a = p.sample(&mut r);
        let rewarded = a == target;
        let delta = q.rpe(a, rewarded, 0.0);
        q = q.update(a, rewarded, 0.4, 0.0);
        println!("trial {trial}: chose {a:?} p={:.3} reward={rewarded} rpe={delta:+.3} q={:.3?}", p.prob(a), q.values());
    }
    println!("after decay: {:.3?}", q.decay(0.5).values());
}
