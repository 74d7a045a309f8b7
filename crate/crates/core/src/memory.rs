//! Bayesian working memory.
//!
//! The store keeps one item per encoded trial, newest first. An item holds
//! `p(a|t)`, the probability that action `a` was performed at trial `t`, and
//! `p(r|a,t)`, the probability of outcome `r` given that action. Encoding a
//! new trial blurs every older item toward the uniform distribution and drops
//! items beyond the capacity.
//!
//! Decisions read the store item by item. The accumulator keeps the running
//! sum of per-item joints `p(r|a,t) p(a|t)`; action values are the ratio
//! `p(a|r=1) / p(a|r=0)` of its conditionals, normalized over actions.
//! Retrieval stops once the entropy of that distribution drops to the
//! threshold or the store is exhausted.

use std::collections::VecDeque;

use crate::policy::{Action, ActionDist, H_MAX, N_ACTIONS};

/// Floor on `p(a|r=0)` so the value ratio stays finite.
pub const EPS_DIV: f64 = 1e-8;

/// `[p(r=0|a), p(r=1|a)]`
type RewardGivenAction = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemoryItem {
    pub p_action: [f64; N_ACTIONS],
    pub p_reward: [RewardGivenAction; N_ACTIONS],
}

impl MemoryItem {
    /// Sharp description of one trial: the chosen action with certainty, its
    /// observed outcome with certainty, and an uninformative outcome for the
    /// actions that were not taken.
    pub fn observed(a: Action, rewarded: bool) -> Self {
        let mut p_reward = [[0.5, 0.5]; N_ACTIONS];
        p_reward[a.index()] = if rewarded { [0.0, 1.0] } else { [1.0, 0.0] };
        MemoryItem { p_action: *ActionDist::one_hot(a).probs(), p_reward }
    }

    /// Linear mixing with the uniform distribution: `p <- (1 - eta) p + eta U`.
    pub fn blur(&mut self, eta: f64) {
        let u_a = 1.0 / N_ACTIONS as f64;
        for p in self.p_action.iter_mut() {
            *p = (1.0 - eta) * *p + eta * u_a;
        }
        for col in self.p_reward.iter_mut() {
            for p in col.iter_mut() {
                *p = (1.0 - eta) * *p + eta * 0.5;
            }
        }
    }

    fn joint(&self) -> [[f64; 2]; N_ACTIONS] {
        let mut j = [[0.0; 2]; N_ACTIONS];
        for a in 0..N_ACTIONS {
            for r in 0..2 {
                j[a][r] = self.p_reward[a][r] * self.p_action[a];
            }
        }
        j
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WmStore {
    items: VecDeque<MemoryItem>,
    capacity: usize,
    noise: f64,
}

impl WmStore {
    pub fn new(capacity: usize, noise: f64) -> Self {
        WmStore { items: VecDeque::with_capacity(capacity + 1), capacity, noise }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Items, newest first.
    pub fn items(&self) -> impl Iterator<Item = &MemoryItem> {
        self.items.iter()
    }

    pub fn get(&self, i: usize) -> Option<&MemoryItem> {
        self.items.get(i)
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }

    pub fn encode(&mut self, a: Action, rewarded: bool) {
        for item in self.items.iter_mut() {
            item.blur(self.noise);
        }
        self.items.push_front(MemoryItem::observed(a, rewarded));
        self.items.truncate(self.capacity);
    }
}

/// In-trial retrieval state.
#[derive(Clone, Debug, PartialEq)]
pub struct WmAccumulator {
    sum: [[f64; 2]; N_ACTIONS],
    retrieved: usize,
    dist: ActionDist,
    entropy: f64,
}

impl Default for WmAccumulator {
    fn default() -> Self {
        WmAccumulator {
            sum: [[0.0; 2]; N_ACTIONS],
            retrieved: 0,
            dist: ActionDist::uniform(),
            entropy: H_MAX,
        }
    }
}

impl WmAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn retrieved(&self) -> usize {
        self.retrieved
    }

    /// Entropy of [`Self::action_probability`]; `H_MAX` before any retrieval.
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    pub fn action_probability(&self) -> ActionDist {
        self.dist
    }

    /// Normalized `p(a, r | t_0..i)`, indexed `[a][r]`.
    pub fn joint(&self) -> [[f64; 2]; N_ACTIONS] {
        let total: f64 = self.sum.iter().flatten().sum();
        if total <= 0.0 {
            return [[1.0 / (2 * N_ACTIONS) as f64; 2]; N_ACTIONS];
        }
        self.sum.map(|col| col.map(|x| x / total))
    }

    /// Fold the next-older item of `store` into the running sum.
    ///
    /// # Panics
    ///
    /// If every item of `store` has already been retrieved.
    pub fn retrieve_next(&mut self, store: &WmStore) {
        let item = store
            .get(self.retrieved)
            .unwrap_or_else(|| panic!("retrieval past the end of a {}-item store", store.len()));
        let j = item.joint();
        for a in 0..N_ACTIONS {
            for r in 0..2 {
                self.sum[a][r] += j[a][r];
            }
        }
        self.retrieved += 1;
        self.dist = ratio_policy(&self.conditional(true), &self.conditional(false));
        self.entropy = self.dist.entropy();
    }

    /// `p(a | r)` with the column for `r` normalized over actions. An empty
    /// column is uniform.
    pub fn conditional(&self, rewarded: bool) -> [f64; N_ACTIONS] {
        let r = rewarded as usize;
        let col: [f64; N_ACTIONS] = std::array::from_fn(|a| self.sum[a][r]);
        *ActionDist::from_weights(col).probs()
    }

    /// `p(r | a, t_0..i)`; 0.5 when the retrieved items say nothing about `a`.
    pub fn reward_likelihood(&self, a: Action, rewarded: bool) -> f64 {
        let [p0, p1] = self.sum[a.index()];
        let total = p0 + p1;
        if total <= 0.0 {
            return 0.5;
        }
        if rewarded {
            p1 / total
        } else {
            p0 / total
        }
    }
}

/// Action distribution from the value ratio `p(a|r=1) / p(a|r=0)`.
pub fn ratio_policy(given_reward: &[f64; N_ACTIONS], given_no_reward: &[f64; N_ACTIONS]) -> ActionDist {
    let q: [f64; N_ACTIONS] = std::array::from_fn(|a| given_reward[a] / given_no_reward[a].max(EPS_DIV));
    ActionDist::from_weights(q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BwmDecision {
    pub dist: ActionDist,
    pub retrieved: usize,
    pub acc: WmAccumulator,
}

/// Retrieve items one by one while the entropy stays above `theta`. The
/// decision is forced once the store is exhausted.
pub fn bwm_decide(store: &WmStore, theta: f64) -> BwmDecision {
    continue_retrieval(WmAccumulator::new(), store, theta)
}

/// Resume retrieval from an existing accumulator.
pub fn continue_retrieval(mut acc: WmAccumulator, store: &WmStore, theta: f64) -> BwmDecision {
    while acc.entropy() > theta && acc.retrieved() < store.len() {
        acc.retrieve_next(store);
    }
    BwmDecision { dist: acc.action_probability(), retrieved: acc.retrieved(), acc }
}

/// Fold the whole store, ready for the next trial's decision.
pub fn anticipate(store: &WmStore) -> WmAccumulator {
    let mut acc = WmAccumulator::new();
    while acc.retrieved() < store.len() {
        acc.retrieve_next(store);
    }
    acc
}

/// Encoding gate on the reward prediction error: encode when `delta` falls
/// outside `[xi1, xi2]`.
pub fn thr_gate(delta: f64, xi1: f64, xi2: f64) -> bool {
    delta < xi1 || delta > xi2
}
