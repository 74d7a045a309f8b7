//! Single-state Q-learning over the four targets.

use serde::{Deserialize, Serialize};

use crate::policy::{Action, ActionDist, N_ACTIONS};

/// Baseline the values decay toward and are reset to.
pub const Q0: f64 = 0.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QTable([f64; N_ACTIONS]);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QlParams {
    pub alpha: f64,
    pub beta: f64,
    /// Zero unless the discount factor is a free parameter.
    pub gamma: f64,
    /// Retention per trial; only used when `decay_enabled`.
    pub kappa: f64,
    pub reset_on_new_problem: bool,
    pub decay_enabled: bool,
}

impl Default for QlParams {
    fn default() -> Self {
        QlParams {
            alpha: 0.1,
            beta: 3.0,
            gamma: 0.0,
            kappa: 1.0,
            reset_on_new_problem: true,
            decay_enabled: false,
        }
    }
}

impl QTable {
    pub fn new() -> Self {
        QTable([Q0; N_ACTIONS])
    }

    pub fn from_values(q: [f64; N_ACTIONS]) -> Self {
        QTable(q)
    }

    pub fn values(&self) -> &[f64; N_ACTIONS] {
        &self.0
    }

    pub fn get(&self, a: Action) -> f64 {
        self.0[a.index()]
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Temporal-difference error `r + gamma * max_b Q(b) - Q(a)`. The task has
    /// a single state, so the successor values are the current ones.
    pub fn rpe(&self, a: Action, rewarded: bool, gamma: f64) -> f64 {
        reward(rewarded) + gamma * self.max() - self.get(a)
    }

    pub fn update(&self, a: Action, rewarded: bool, alpha: f64, gamma: f64) -> QTable {
        let mut q = *self;
        q.0[a.index()] += alpha * self.rpe(a, rewarded, gamma);
        q
    }

    /// Move every value a fraction `1 - kappa` of the way back to [`Q0`].
    pub fn decay(&self, kappa: f64) -> QTable {
        QTable(self.0.map(|q| q + (1.0 - kappa) * (Q0 - q)))
    }

    /// Reset at a problem boundary when the variation asks for it.
    pub fn on_problem_boundary(&self, p: &QlParams) -> QTable {
        if p.reset_on_new_problem {
            QTable::new()
        } else {
            *self
        }
    }

    pub fn softmax(&self, beta: f64) -> ActionDist {
        softmax(&self.0, beta)
    }
}

fn reward(rewarded: bool) -> f64 {
    if rewarded {
        1.0
    } else {
        0.0
    }
}

/// `p(a) ∝ exp(beta * v(a))`, shifted by the maximum before exponentiating.
pub fn softmax(v: &[f64; N_ACTIONS], beta: f64) -> ActionDist {
    let m = v.iter().map(|x| beta * x).fold(f64::NEG_INFINITY, f64::max);
    ActionDist::from_weights(v.map(|x| (beta * x - m).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(i: usize) -> Action {
        Action::new(i).unwrap()
    }

    #[test]
    fn update_examples() {
        let q = QTable::new().update(a(0), true, 0.1, 0.0);
        assert!((q.get(a(0)) - 0.1).abs() < 1e-12);

        let q = QTable::from_values([0.5, 0.0, 0.0, 0.0]).update(a(0), false, 0.5, 0.0);
        assert!((q.get(a(0)) - 0.25).abs() < 1e-12);

        let q = QTable::from_values([0.5, 1.0, 0.0, 0.0]).update(a(0), false, 0.1, 0.9);
        assert!((q.get(a(0)) - 0.54).abs() < 1e-12);
        assert_eq!(q.get(a(1)), 1.0);
    }

    #[test]
    fn softmax_examples() {
        let flat = QTable::new().softmax(7.0);
        assert_eq!(flat, ActionDist::uniform());
        let cold = QTable::from_values([3.0, -1.0, 0.2, 9.0]).softmax(0.0);
        assert_eq!(cold, ActionDist::uniform());

        let p = QTable::from_values([1.0, 0.0, 0.0, 0.0]).softmax(1.0);
        let e = std::f64::consts::E;
        assert!((p.probs()[0] - e / (e + 3.0)).abs() < 1e-12);
        assert!((p.probs()[0] - 0.4755).abs() < 5e-4);
        for i in 1..4 {
            assert!((p.probs()[i] - 1.0 / (e + 3.0)).abs() < 1e-12);
            assert!((p.probs()[i] - 0.1748).abs() < 5e-4);
        }
    }

    #[test]
    fn softmax_survives_huge_inputs() {
        let p = QTable::from_values([1000.0, 999.0, 0.0, -5.0]).softmax(100.0);
        assert!(p.probs().iter().all(|x| x.is_finite()));
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(p.argmax(), a(0));
    }

    #[test]
    fn decay_examples() {
        let q = QTable::from_values([0.8, -0.2, 0.0, 0.4]);
        assert_eq!(q.decay(1.0), q);
        assert_eq!(q.decay(0.0), QTable::new());
        assert!((q.decay(0.9).get(a(0)) - 0.72).abs() < 1e-12);
    }

    #[test]
    fn rpe_examples() {
        assert_eq!(QTable::new().rpe(a(2), true, 0.0), 1.0);
        assert_eq!(QTable::from_values([1.0, 0.0, 0.0, 0.0]).rpe(a(0), true, 0.0), 0.0);
        let d = QTable::from_values([0.2, 0.6, 0.0, 0.0]).rpe(a(0), false, 0.5);
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn boundary_reset() {
        let q = QTable::from_values([0.3, 0.7, 0.0, 0.0]);
        let reset = QlParams { reset_on_new_problem: true, ..Default::default() };
        let keep = QlParams { reset_on_new_problem: false, ..Default::default() };
        assert_eq!(q.on_problem_boundary(&reset), QTable::new());
        assert_eq!(q.on_problem_boundary(&keep), q);
    }

    fn qvals() -> impl Strategy<Value = [f64; 4]> {
        proptest::array::uniform4(-5.0f64..5.0)
    }

    proptest! {
        #[test]
        fn softmax_is_a_distribution(q in qvals(), beta in 0.0f64..100.0) {
            let p = QTable::from_values(q).softmax(beta);
            prop_assert!(p.probs().iter().all(|&x| x >= 0.0));
            prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn softmax_argmax_matches_values(q in qvals(), beta in 0.01f64..50.0) {
            let table = QTable::from_values(q);
            let best = table.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let p = table.softmax(beta);
            prop_assert_eq!(table.get(p.argmax()), best);
        }

        #[test]
        fn update_contracts_toward_reward(q in qvals(), alpha in 0.0f64..=1.0, r: bool, i in 0usize..4) {
            let table = QTable::from_values(q);
            let rv = if r { 1.0 } else { 0.0 };
            let next = table.update(a(i), r, alpha, 0.0);
            let lhs = (next.get(a(i)) - rv).abs();
            let rhs = (1.0 - alpha) * (table.get(a(i)) - rv).abs();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn decay_moves_toward_baseline(q in qvals(), kappa in 0.0f64..=1.0) {
            let table = QTable::from_values(q);
            let d = table.decay(kappa);
            for i in 0..4 {
                prop_assert!((d.values()[i] - Q0).abs() <= (q[i] - Q0).abs() + 1e-15);
            }
            prop_assert_eq!(table.decay(1.0), table);
        }
    }
}
