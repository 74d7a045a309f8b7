use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coordination::MetaGranularity;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "QL")]
    QLearning,
    #[serde(rename = "BWM")]
    WorkingMemory,
    Mixture,
    Coordination,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] =
        [ModelKind::QLearning, ModelKind::WorkingMemory, ModelKind::Mixture, ModelKind::Coordination];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::QLearning => "QL",
            ModelKind::WorkingMemory => "BWM",
            ModelKind::Mixture => "Mixture",
            ModelKind::Coordination => "Coordination",
        }
    }

    pub fn uses_q(self) -> bool {
        self != ModelKind::WorkingMemory
    }

    pub fn uses_wm(self) -> bool {
        self != ModelKind::QLearning
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Free parameters, named as they appear in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Param {
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "kappa")]
    Kappa,
    /// Working-memory capacity; rounded to an integer when used.
    #[serde(rename = "N")]
    Capacity,
    #[serde(rename = "theta")]
    Theta,
    #[serde(rename = "sigma")]
    Sigma,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "lambda1")]
    Lambda1,
    #[serde(rename = "lambda2")]
    Lambda2,
    #[serde(rename = "xi1")]
    Xi1,
    #[serde(rename = "xi2")]
    Xi2,
    #[serde(rename = "w0")]
    W0,
    /// Inverse temperature on the summed values of the coordination model.
    #[serde(rename = "beta_decision")]
    BetaDecision,
}

impl Param {
    pub const ALL: [Param; 14] = [
        Param::Alpha,
        Param::Beta,
        Param::Gamma,
        Param::Kappa,
        Param::Capacity,
        Param::Theta,
        Param::Sigma,
        Param::Eta,
        Param::Lambda1,
        Param::Lambda2,
        Param::Xi1,
        Param::Xi2,
        Param::W0,
        Param::BetaDecision,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::Gamma => "gamma",
            Param::Kappa => "kappa",
            Param::Capacity => "N",
            Param::Theta => "theta",
            Param::Sigma => "sigma",
            Param::Eta => "eta",
            Param::Lambda1 => "lambda1",
            Param::Lambda2 => "lambda2",
            Param::Xi1 => "xi1",
            Param::Xi2 => "xi2",
            Param::W0 => "w0",
            Param::BetaDecision => "beta_decision",
        }
    }

    pub fn from_name(s: &str) -> Option<Param> {
        Param::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Search bounds used when fitting.
    pub fn default_bounds(self) -> (f64, f64) {
        match self {
            Param::Alpha | Param::Kappa | Param::Eta | Param::W0 => (0.0, 1.0),
            Param::Beta | Param::BetaDecision => (0.0, 100.0),
            // gamma lives in [0, 1)
            Param::Gamma => (0.0, 0.99),
            Param::Capacity => (1.0, 15.0),
            Param::Theta => (0.0, 2.0),
            Param::Sigma => (0.0, 3.0),
            Param::Lambda1 | Param::Lambda2 => (0.0, 20.0),
            Param::Xi1 => (-20.0, 0.0),
            Param::Xi2 => (0.0, 20.0),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Model mechanisms switched on by a variation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Variation {
    /// Discount factor is fitted instead of fixed at zero.
    pub free_gamma: bool,
    /// Q-values are kept across problems.
    pub no_init: bool,
    /// Q-values decay toward zero every trial.
    pub decay: bool,
    /// Working memory pre-computes the next decision after search errors.
    pub ant: bool,
    /// Meta-learned mean entropies bias the retrieval sigmoid.
    pub meta: bool,
    /// Encoding is gated on the reward prediction error.
    pub thr: bool,
}

impl Variation {
    pub const ORIGINAL: Variation =
        Variation { free_gamma: false, no_init: false, decay: false, ant: false, meta: false, thr: false };

    /// The numbered variations; combinations a model does not take are
    /// rejected.
    pub fn numbered(kind: ModelKind, id: u8) -> Result<Variation> {
        use ModelKind::*;
        let base = Variation::ORIGINAL;
        let gamma = Variation { free_gamma: true, ..base };
        let keep = Variation { no_init: true, ..gamma };
        let forget = Variation { decay: true, ..keep };
        let v = match (id, kind) {
            (1, _) => base,
            (2, QLearning | Mixture | Coordination) => gamma,
            (3, QLearning | Mixture | Coordination) => keep,
            (4, QLearning | Mixture | Coordination) => forget,
            (5, WorkingMemory) => Variation { ant: true, ..base },
            (5, Mixture | Coordination) => Variation { ant: true, ..forget },
            (6, Coordination) => Variation { meta: true, ..forget },
            (7, Mixture | Coordination) => Variation { thr: true, ..forget },
            (1..=7, _) => return Err(Error::config(format!("variation {id} does not apply to {kind}"))),
            _ => return Err(Error::config(format!("unknown variation {id}; expected 1..=7"))),
        };
        Ok(v)
    }

    pub fn validate(&self, kind: ModelKind) -> Result<()> {
        let bad = |what: &str| Err(Error::config(format!("{what} is not available for {kind}")));
        if kind == ModelKind::WorkingMemory && (self.free_gamma || self.no_init || self.decay) {
            return bad("a Q-learning variation");
        }
        if self.ant && kind == ModelKind::QLearning {
            return bad("anticipation");
        }
        if self.meta && kind != ModelKind::Coordination {
            return bad("meta-learning");
        }
        if self.thr && !matches!(kind, ModelKind::Mixture | ModelKind::Coordination) {
            return bad("prediction-error gating");
        }
        Ok(())
    }
}

/// Free parameters of a model under a variation, in canonical order.
pub fn free_parameters(kind: ModelKind, v: &Variation) -> Vec<Param> {
    use Param::*;
    let mut ps = match kind {
        ModelKind::QLearning => vec![Alpha, Beta, Sigma],
        ModelKind::WorkingMemory => vec![Capacity, Theta, Sigma, Eta],
        ModelKind::Mixture => vec![Alpha, Beta, Sigma, Capacity, Theta, Eta, W0],
        ModelKind::Coordination => vec![Alpha, Beta, Sigma, Capacity, Eta, Lambda1, Lambda2, BetaDecision],
    };
    if kind.uses_q() {
        if v.free_gamma {
            ps.push(Gamma);
        }
        if v.decay {
            ps.push(Kappa);
        }
    }
    if v.thr {
        ps.extend([Xi1, Xi2]);
    }
    ps
}

/// Named parameter values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(BTreeMap<Param, f64>);

impl ParamVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, p: Param, v: f64) -> Self {
        self.0.insert(p, v);
        self
    }

    pub fn set(&mut self, p: Param, v: f64) {
        self.0.insert(p, v);
    }

    pub fn get(&self, p: Param) -> Option<f64> {
        self.0.get(&p).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Param, f64)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }
}

impl FromIterator<(Param, f64)> for ParamVector {
    fn from_iter<I: IntoIterator<Item = (Param, f64)>>(iter: I) -> Self {
        ParamVector(iter.into_iter().collect())
    }
}

/// Either a numbered variation or explicit mechanism flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VariationSpec {
    Numbered(u8),
    Flags(Variation),
}

impl Default for VariationSpec {
    fn default() -> Self {
        VariationSpec::Numbered(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub variation: VariationSpec,
    pub params: ParamVector,
    #[serde(default, skip_serializing_if = "is_default_granularity")]
    pub meta_granularity: MetaGranularity,
}

fn is_default_granularity(g: &MetaGranularity) -> bool {
    *g == MetaGranularity::default()
}

impl AgentConfig {
    pub fn new(model: ModelKind, variation: u8, params: ParamVector) -> Self {
        AgentConfig {
            model,
            variation: VariationSpec::Numbered(variation),
            params,
            meta_granularity: MetaGranularity::default(),
        }
    }

    pub fn flags(&self) -> Result<Variation> {
        let v = match self.variation {
            VariationSpec::Numbered(id) => Variation::numbered(self.model, id)?,
            VariationSpec::Flags(v) => v,
        };
        v.validate(self.model)?;
        Ok(v)
    }

    pub fn free_parameters(&self) -> Result<Vec<Param>> {
        Ok(free_parameters(self.model, &self.flags()?))
    }

    /// Check the variation, that exactly the free parameters are present, and
    /// that every value lies inside its bounds.
    pub fn validate(&self) -> Result<()> {
        let want = self.free_parameters()?;
        for p in &want {
            let v = self
                .params
                .get(*p)
                .ok_or_else(|| Error::config(format!("{} needs parameter {p}", self.model)))?;
            let (lo, hi) = p.default_bounds();
            if !(v.is_finite() && v >= lo && v <= hi) {
                return Err(Error::config(format!("{p} = {v} outside [{lo}, {hi}]")));
            }
        }
        if let Some((extra, _)) = self.params.iter().find(|(p, _)| !want.contains(p)) {
            return Err(Error::config(format!("{extra} is not a parameter of {} under this variation", self.model)));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: AgentConfig = serde_json::from_str(s).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
