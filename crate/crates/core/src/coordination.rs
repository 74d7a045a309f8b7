//! Combining working memory with Q-learning.
//!
//! Two schemes are available. The weight-based mixture blends the two
//! policies with a weight that tracks which system better predicted the
//! outcomes. The entropy-based coordination lets the entropies of both systems
//! drive a sigmoid that decides, item by item, whether working memory keeps
//! retrieving; the two value sets are then summed.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::memory::{WmAccumulator, WmStore};
use crate::policy::{ActionDist, H_MAX, N_ACTIONS};
use crate::qlearning::{softmax, QTable};
use crate::task::Phase;

pub const DEFAULT_W0: f64 = 0.5;

/// Floor applied to both likelihoods in the weight update.
pub const LIKELIHOOD_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureState {
    pub w: f64,
    pub w0: f64,
}

impl MixtureState {
    pub fn new(w0: f64) -> Self {
        MixtureState { w: w0, w0 }
    }
}

impl Default for MixtureState {
    fn default() -> Self {
        Self::new(DEFAULT_W0)
    }
}

/// `p(a) = (1 - w) p_ql(a) + w p_bwm(a)`
pub fn mixture_combine(p_ql: &ActionDist, p_bwm: &ActionDist, w: f64) -> ActionDist {
    let (q, b) = (p_ql.probs(), p_bwm.probs());
    ActionDist::from_normalized(std::array::from_fn(|a| (1.0 - w) * q[a] + w * b[a]))
}

/// Bayesian reliability update of the mixture weight.
pub fn mixture_weight_update(w: f64, lik_bwm: f64, lik_ql: f64) -> f64 {
    if lik_bwm <= 0.0 && lik_ql <= 0.0 {
        return w;
    }
    let lb = lik_bwm.max(LIKELIHOOD_FLOOR);
    let lq = lik_ql.max(LIKELIHOOD_FLOOR);
    let num = lb * w;
    let den = num + lq * (1.0 - w);
    if den <= 0.0 {
        return w;
    }
    (num / den).clamp(0.0, 1.0)
}

/// Probability Q-learning assigns to an outcome: the action value, clipped
/// into `[eps, 1 - eps]`, for a reward and its complement otherwise.
pub fn ql_outcome_likelihood(q_a: f64, rewarded: bool) -> f64 {
    let eps = LIKELIHOOD_FLOOR;
    let p1 = q_a.max(eps).clamp(eps, 1.0 - eps);
    if rewarded {
        p1
    } else {
        1.0 - p1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordParams {
    pub lambda1: f64,
    pub lambda2: f64,
}

/// How finely trials are told apart by the meta-learned entropy table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaGranularity {
    /// Phase and position within the phase, positions clipped at 5.
    #[default]
    PhaseAndIndex,
    PhaseOnly,
}

pub const MAX_TYPE_INDEX: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TrialType {
    pub phase: Phase,
    pub index: u32,
}

impl TrialType {
    pub fn new(phase: Phase, index_in_phase: u32, granularity: MetaGranularity) -> Self {
        let index = match granularity {
            MetaGranularity::PhaseAndIndex => index_in_phase.min(MAX_TYPE_INDEX),
            MetaGranularity::PhaseOnly => 0,
        };
        TrialType { phase, index }
    }
}

/// Mean working-memory and Q-learning entropies per trial type.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetaEntropyTable {
    pub granularity: MetaGranularity,
    entries: BTreeMap<TrialType, (f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyLog {
    pub trial_type: TrialType,
    pub h_bwm: f64,
    pub h_ql: f64,
}

impl MetaEntropyTable {
    pub fn from_entries(granularity: MetaGranularity, entries: impl IntoIterator<Item = (TrialType, (f64, f64))>) -> Self {
        MetaEntropyTable { granularity, entries: entries.into_iter().collect() }
    }

    /// `(mean H_bwm, mean H_ql)` for the type; `(H_MAX, H_MAX)` if unseen.
    pub fn lookup(&self, t: TrialType) -> (f64, f64) {
        self.entries.get(&t).copied().unwrap_or((H_MAX, H_MAX))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&TrialType, &(f64, f64))> {
        self.entries.iter()
    }
}

/// Per-type arithmetic means of logged entropies.
pub fn meta_learn(logs: &[EntropyLog], granularity: MetaGranularity) -> MetaEntropyTable {
    let mut acc: BTreeMap<TrialType, (f64, f64, usize)> = BTreeMap::new();
    for log in logs {
        let key = TrialType::new(log.trial_type.phase, log.trial_type.index, granularity);
        let e = acc.entry(key).or_insert((0.0, 0.0, 0));
        e.0 += log.h_bwm;
        e.1 += log.h_ql;
        e.2 += 1;
    }
    MetaEntropyTable {
        granularity,
        entries: acc
            .into_iter()
            .map(|(k, (b, q, n))| (k, (b / n as f64, q / n as f64)))
            .collect(),
    }
}

/// Sigmoid probability of retrieving one more item,
/// `1 - 1 / (1 + lambda1 (n - i) exp(-lambda2 E))` with
/// `E = 2 H_max - H_bwm - H_ql (+ mean H_bwm - mean H_ql)`.
pub fn retrieval_probability(
    h_bwm: f64,
    h_ql: f64,
    n: usize,
    i: usize,
    params: &CoordParams,
    meta_bias: Option<(f64, f64)>,
) -> f64 {
    let remaining = n.saturating_sub(i);
    if remaining == 0 {
        return 0.0;
    }
    let mut e = 2.0 * H_MAX - h_bwm - h_ql;
    if let Some((mean_bwm, mean_ql)) = meta_bias {
        e = e + mean_bwm - mean_ql;
    }
    let z = params.lambda1 * remaining as f64 * (-params.lambda2 * e).exp();
    1.0 - 1.0 / (1.0 + z)
}

/// Everything the coordination decision reads.
#[derive(Clone, Debug)]
pub struct CoordInputs<'a> {
    pub q: &'a QTable,
    /// Inverse temperature of the Q-learning policy whose entropy enters the
    /// sigmoid.
    pub beta_ql: f64,
    /// Inverse temperature applied to the summed values.
    pub beta_decision: f64,
    pub store: &'a WmStore,
    pub params: CoordParams,
    pub meta_bias: Option<(f64, f64)>,
    /// Starting accumulator: empty, or the anticipated one.
    pub start: WmAccumulator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordDecision {
    pub dist: ActionDist,
    /// Items retrieved during this decision.
    pub retrieved: usize,
    pub acc: WmAccumulator,
    pub h_ql: f64,
}

/// One way the retrieval loop can end, with its probability.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordOutcome {
    pub prob: f64,
    pub decision: CoordDecision,
}

impl CoordInputs<'_> {
    fn h_ql(&self) -> f64 {
        self.q.softmax(self.beta_ql).entropy()
    }

    fn stop(&self, acc: &WmAccumulator, h_ql: f64) -> CoordDecision {
        let q_bwm = acc.action_probability();
        let summed: [f64; N_ACTIONS] = std::array::from_fn(|a| q_bwm.probs()[a] + self.q.values()[a]);
        CoordDecision {
            dist: softmax(&summed, self.beta_decision),
            retrieved: acc.retrieved() - self.start.retrieved(),
            acc: acc.clone(),
            h_ql,
        }
    }

    fn p_retrieve(&self, acc: &WmAccumulator, h_ql: f64) -> f64 {
        retrieval_probability(acc.entropy(), h_ql, self.store.len(), acc.retrieved(), &self.params, self.meta_bias)
    }
}

/// Sample the retrieval loop: each step retrieves with the sigmoid
/// probability and the loop ends on the first refusal or when the store is
/// exhausted.
pub fn coordination_decide<R: Rng + ?Sized>(inputs: &CoordInputs<'_>, rng: &mut R) -> CoordDecision {
    let h_ql = inputs.h_ql();
    let mut acc = inputs.start.clone();
    while acc.retrieved() < inputs.store.len() {
        let p = inputs.p_retrieve(&acc, h_ql);
        if rng.gen::<f64>() < p {
            acc.retrieve_next(inputs.store);
        } else {
            break;
        }
    }
    inputs.stop(&acc, h_ql)
}

/// Enumerate every stopping point of the retrieval loop with its probability.
/// The probabilities sum to one.
pub fn coordination_outcomes(inputs: &CoordInputs<'_>) -> Vec<CoordOutcome> {
    let h_ql = inputs.h_ql();
    let mut acc = inputs.start.clone();
    let mut reach = 1.0;
    let mut out = Vec::new();
    loop {
        let p = inputs.p_retrieve(&acc, h_ql);
        let stop = reach * (1.0 - p);
        if stop > 0.0 {
            out.push(CoordOutcome { prob: stop, decision: inputs.stop(&acc, h_ql) });
        }
        reach *= p;
        if reach <= 0.0 || acc.retrieved() >= inputs.store.len() {
            break;
        }
        acc.retrieve_next(inputs.store);
    }
    out
}

/// The action distribution averaged over the retrieval loop's randomness.
pub fn marginal_dist(outcomes: &[CoordOutcome]) -> ActionDist {
    let mut p = [0.0; N_ACTIONS];
    for o in outcomes {
        for (acc, x) in p.iter_mut().zip(o.decision.dist.probs()) {
            *acc += o.prob * x;
        }
    }
    ActionDist::from_weights(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::Action;
    use crate::rng;
    use proptest::prelude::*;

    fn a(i: usize) -> Action {
        Action::new(i).unwrap()
    }

    fn d(w: [f64; 4]) -> ActionDist {
        ActionDist::from_weights(w)
    }

    #[test]
    fn mixture_examples() {
        let ql = d([0.7, 0.1, 0.1, 0.1]);
        let wm = d([0.1, 0.7, 0.1, 0.1]);
        assert_eq!(mixture_combine(&ql, &wm, 0.0), ql);
        assert_eq!(mixture_combine(&ql, &wm, 1.0), wm);
        let mid = mixture_combine(&ql, &wm, 0.5);
        for (x, y) in mid.probs().iter().zip([0.4, 0.4, 0.1, 0.1]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn weight_update_examples() {
        assert_eq!(mixture_weight_update(0.3, 0.6, 0.6), 0.3);
        assert!((mixture_weight_update(0.5, 0.8, 0.2) - 0.8).abs() < 1e-12);
        assert_eq!(mixture_weight_update(1.0, 0.01, 0.99), 1.0);
        assert_eq!(mixture_weight_update(0.0, 0.99, 0.01), 0.0);
        assert_eq!(mixture_weight_update(0.4, 0.0, 0.0), 0.4);
    }

    #[test]
    fn ql_outcome_likelihood_is_clipped() {
        assert_eq!(ql_outcome_likelihood(0.3, true), 0.3);
        assert!((ql_outcome_likelihood(0.3, false) - 0.7).abs() < 1e-15);
        assert_eq!(ql_outcome_likelihood(-1.0, true), LIKELIHOOD_FLOOR);
        assert_eq!(ql_outcome_likelihood(2.0, true), 1.0 - LIKELIHOOD_FLOOR);
    }

    #[test]
    fn retrieval_probability_examples() {
        let p = CoordParams { lambda1: 1.0, lambda2: 3.0 };
        assert_eq!(retrieval_probability(1.0, 1.0, 4, 4, &p, None), 0.0);
        assert!((retrieval_probability(2.0, 2.0, 5, 4, &p, None) - 0.5).abs() < 1e-12);
        let sharp = CoordParams { lambda1: 1.0, lambda2: 50.0 };
        assert!(retrieval_probability(0.0, 0.0, 5, 0, &sharp, None) < 1e-80);
    }

    #[test]
    fn meta_bias_toward_high_wm_entropy_lowers_retrieval() {
        let p = CoordParams { lambda1: 2.0, lambda2: 1.0 };
        let plain = retrieval_probability(1.5, 1.0, 3, 1, &p, Some((0.2, 1.0)));
        let biased = retrieval_probability(1.5, 1.0, 3, 1, &p, Some((1.8, 1.0)));
        assert!(biased < plain);
    }

    #[test]
    fn zero_meta_table_is_bitwise_neutral() {
        let p = CoordParams { lambda1: 1.7, lambda2: 0.9 };
        for (hb, hq, n, i) in [(1.3, 0.7, 5, 2), (2.0, 0.1, 9, 0), (0.33, 1.99, 3, 1)] {
            let plain = retrieval_probability(hb, hq, n, i, &p, None);
            let zero = retrieval_probability(hb, hq, n, i, &p, Some((0.0, 0.0)));
            assert_eq!(plain.to_bits(), zero.to_bits());
        }
    }

    #[test]
    fn meta_learn_examples() {
        let t = TrialType::new(Phase::Search, 1, MetaGranularity::PhaseAndIndex);
        let one = meta_learn(&[EntropyLog { trial_type: t, h_bwm: 1.0, h_ql: 0.5 }], MetaGranularity::PhaseAndIndex);
        assert_eq!(one.lookup(t), (1.0, 0.5));
        let two = meta_learn(
            &[
                EntropyLog { trial_type: t, h_bwm: 1.0, h_ql: 1.0 },
                EntropyLog { trial_type: t, h_bwm: 0.0, h_ql: 0.0 },
            ],
            MetaGranularity::PhaseAndIndex,
        );
        assert_eq!(two.lookup(t), (0.5, 0.5));
        let unseen = TrialType::new(Phase::Repetition, 0, MetaGranularity::PhaseAndIndex);
        assert_eq!(two.lookup(unseen), (H_MAX, H_MAX));
    }

    #[test]
    fn trial_types_clip_and_collapse() {
        let far = TrialType::new(Phase::Search, 12, MetaGranularity::PhaseAndIndex);
        assert_eq!(far.index, MAX_TYPE_INDEX);
        let coarse = TrialType::new(Phase::Repetition, 3, MetaGranularity::PhaseOnly);
        assert_eq!(coarse.index, 0);
        let logs: Vec<_> = (0..4)
            .map(|i| EntropyLog { trial_type: TrialType { phase: Phase::Search, index: i }, h_bwm: i as f64, h_ql: 0.0 })
            .collect();
        let table = meta_learn(&logs, MetaGranularity::PhaseOnly);
        assert_eq!(table.lookup(TrialType::new(Phase::Search, 2, MetaGranularity::PhaseOnly)), (1.5, 0.0));
    }

    fn inputs<'a>(q: &'a QTable, store: &'a WmStore, lambda1: f64) -> CoordInputs<'a> {
        CoordInputs {
            q,
            beta_ql: 4.0,
            beta_decision: 4.0,
            store,
            params: CoordParams { lambda1, lambda2: 0.5 },
            meta_bias: None,
            start: WmAccumulator::new(),
        }
    }

    #[test]
    fn empty_store_sums_uniform_with_q() {
        let q = QTable::from_values([0.2, 0.0, 0.5, 0.1]);
        let store = WmStore::new(4, 0.0);
        let out = coordination_decide(&inputs(&q, &store, 5.0), &mut rng::stream(0));
        assert_eq!(out.retrieved, 0);
        let summed = q.values().map(|x| x + 0.25);
        assert_eq!(out.dist, softmax(&summed, 4.0));
    }

    #[test]
    fn zero_gain_never_retrieves() {
        let q = QTable::from_values([0.0, 0.3, 0.1, 0.0]);
        let mut store = WmStore::new(4, 0.0);
        store.encode(a(2), true);
        let mut r = rng::stream(1);
        for _ in 0..200 {
            let out = coordination_decide(&inputs(&q, &store, 0.0), &mut r);
            assert_eq!(out.retrieved, 0);
            assert_eq!(out.dist.argmax(), q.softmax(4.0).argmax());
        }
    }

    #[test]
    fn a_retrieved_reward_dominates_flat_values() {
        let q = QTable::new();
        let mut store = WmStore::new(4, 0.0);
        store.encode(a(3), true);
        // huge gain makes the single retrieval certain
        let out = coordination_decide(&inputs(&q, &store, 1e12), &mut rng::stream(2));
        assert_eq!(out.retrieved, 1);
        assert_eq!(out.dist.argmax(), a(3));
    }

    #[test]
    fn outcomes_match_sampling_frequencies() {
        let q = QTable::from_values([0.1, 0.0, 0.0, 0.2]);
        let mut store = WmStore::new(6, 0.2);
        for (i, r) in [(0, false), (1, false), (2, true)] {
            store.encode(a(i), r);
        }
        let inp = CoordInputs { params: CoordParams { lambda1: 0.8, lambda2: 0.3 }, ..inputs(&q, &store, 1.0) };
        let outcomes = coordination_outcomes(&inp);
        let total: f64 = outcomes.iter().map(|o| o.prob).sum();
        assert!((total - 1.0).abs() < 1e-12);

        let mut r = rng::stream(3);
        let n = 40_000;
        let mut counts = vec![0usize; store.len() + 1];
        for _ in 0..n {
            counts[coordination_decide(&inp, &mut r).retrieved] += 1;
        }
        for o in &outcomes {
            let freq = counts[o.decision.retrieved] as f64 / n as f64;
            assert!((freq - o.prob).abs() < 0.01, "k={} freq={freq} p={}", o.decision.retrieved, o.prob);
        }
    }

    proptest! {
        #[test]
        fn weight_stays_in_unit_interval(w in 0.0f64..=1.0, lb in 0.0f64..=1.0, lq in 0.0f64..=1.0) {
            let next = mixture_weight_update(w, lb, lq);
            prop_assert!((0.0..=1.0).contains(&next));
        }

        #[test]
        fn mixture_is_normalized(x in proptest::array::uniform4(0.0f64..1.0), y in proptest::array::uniform4(0.0f64..1.0), w in 0.0f64..=1.0) {
            let m = mixture_combine(&d(x), &d(y), w);
            prop_assert!((m.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn retrieval_probability_decreases_with_evidence(
            l1 in 0.01f64..20.0, l2 in 0.01f64..20.0, rem in 1usize..10,
            hb in 0.0f64..=2.0, hq in 0.0f64..=2.0, dh in 0.01f64..1.0,
        ) {
            let p = CoordParams { lambda1: l1, lambda2: l2 };
            let base = retrieval_probability(hb, hq, rem, 0, &p, None);
            prop_assert!((0.0..1.0).contains(&base));
            // lower entropy means larger E
            let sharper = retrieval_probability((hb - dh).max(0.0), hq, rem, 0, &p, None);
            if hb - dh >= 0.0 {
                prop_assert!(sharper <= base);
            }
        }
    }
}
