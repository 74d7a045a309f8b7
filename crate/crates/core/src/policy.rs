//! Actions and probability distributions over the four targets.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub const N_ACTIONS: usize = 4;

/// Maximum entropy of a distribution over [`N_ACTIONS`] actions, in bits.
pub const H_MAX: f64 = 2.0;

/// One of the four targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Action(u8);

impl Action {
    pub const ALL: [Action; N_ACTIONS] = [Action(0), Action(1), Action(2), Action(3)];

    pub fn new(index: usize) -> Option<Self> {
        (index < N_ACTIONS).then(|| Action(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl TryFrom<u8> for Action {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Action::new(v as usize).ok_or_else(|| format!("action {v} out of range 0..{N_ACTIONS}"))
    }
}

impl From<Action> for u8 {
    fn from(a: Action) -> u8 {
        a.0
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A normalized probability distribution over actions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionDist([f64; N_ACTIONS]);

impl ActionDist {
    pub fn uniform() -> Self {
        ActionDist([1.0 / N_ACTIONS as f64; N_ACTIONS])
    }

    pub fn one_hot(a: Action) -> Self {
        let mut p = [0.0; N_ACTIONS];
        p[a.index()] = 1.0;
        ActionDist(p)
    }

    /// Normalize non-negative weights. A zero or non-finite total yields the
    /// uniform distribution.
    pub fn from_weights(w: [f64; N_ACTIONS]) -> Self {
        let total: f64 = w.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Self::uniform();
        }
        ActionDist(w.map(|x| x / total))
    }

    /// Wrap values that are already a distribution, keeping their bits.
    pub(crate) fn from_normalized(p: [f64; N_ACTIONS]) -> Self {
        debug_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        ActionDist(p)
    }

    pub fn probs(&self) -> &[f64; N_ACTIONS] {
        &self.0
    }

    pub fn prob(&self, a: Action) -> f64 {
        self.0[a.index()]
    }

    /// Index of the largest probability; ties go to the lowest action.
    pub fn argmax(&self) -> Action {
        let mut best = 0;
        for i in 1..N_ACTIONS {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        Action(best as u8)
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy(&self.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, &p) in self.0.iter().enumerate() {
            acc += p;
            if u < acc {
                return Action(i as u8);
            }
        }
        // rounding left a sliver above the last cumulative sum
        let last = (0..N_ACTIONS).rev().find(|&i| self.0[i] > 0.0).unwrap_or(N_ACTIONS - 1);
        Action(last as u8)
    }
}

/// `H = -sum p log2 p` with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    let h: f64 = p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum();
    h.max(0.0)
}
