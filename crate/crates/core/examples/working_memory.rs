//! Store outcomes in working memory and watch retrieval resolve the target.

use wmrl::memory::{anticipate, bwm_decide, WmStore};
use wmrl::Action;

fn main() {
    let mut store = WmStore::new(6, 0.1);
    let theta = 0.8;
    for (a, rewarded) in [(0, false), (3, false), (1, true)] {
        store.encode(Action::new(a).unwrap(), rewarded);
        let d = bwm_decide(&store, theta);
        println!(
            "after ({a}, {rewarded}): retrieved {} of {}, entropy {:.3}, policy {:.3?}",
            d.retrieved,
            store.len(),
            d.dist.entropy(),
            d.dist.probs()
        );
    }
    let pre = anticipate(&store);
    println!("anticipated policy over the whole store: {:.3?}", pre.action_probability().probs());
}
