use rand::Rng;

use super::config::{AgentConfig, ModelKind, Param, Variation};
use crate::coordination::{
    coordination_decide, coordination_outcomes, marginal_dist, mixture_combine, mixture_weight_update,
    ql_outcome_likelihood, CoordInputs, CoordParams, EntropyLog, MetaEntropyTable, MetaGranularity, MixtureState,
    TrialType,
};
use crate::error::{Error, Result};
use crate::memory::{anticipate, continue_retrieval, thr_gate, WmAccumulator, WmStore};
use crate::policy::{Action, ActionDist, H_MAX};
use crate::qlearning::{QTable, QlParams};
use crate::task::{Phase, TrialRecord};

/// `log2(i + 1)^sigma + H`, with no retrieval cost when nothing was retrieved.
pub fn simulated_rt(retrieved: usize, entropy: f64, sigma: f64) -> f64 {
    if retrieved == 0 {
        entropy
    } else {
        ((retrieved + 1) as f64).log2().powf(sigma) + entropy
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Resolved {
    ql: QlParams,
    capacity: usize,
    theta: f64,
    sigma: f64,
    eta: f64,
    coord: CoordParams,
    beta_decision: f64,
    xi1: f64,
    xi2: f64,
    w0: f64,
}

impl Resolved {
    fn new(cfg: &AgentConfig, v: &Variation) -> Self {
        let get = |p: Param, default: f64| cfg.params.get(p).unwrap_or(default);
        Resolved {
            ql: QlParams {
                alpha: get(Param::Alpha, 0.0),
                beta: get(Param::Beta, 0.0),
                gamma: if v.free_gamma { get(Param::Gamma, 0.0) } else { 0.0 },
                kappa: if v.decay { get(Param::Kappa, 1.0) } else { 1.0 },
                reset_on_new_problem: !v.no_init,
                decay_enabled: v.decay,
            },
            capacity: get(Param::Capacity, 1.0).round().max(1.0) as usize,
            theta: get(Param::Theta, 0.0),
            sigma: get(Param::Sigma, 0.0),
            eta: get(Param::Eta, 0.0),
            coord: CoordParams { lambda1: get(Param::Lambda1, 0.0), lambda2: get(Param::Lambda2, 0.0) },
            beta_decision: get(Param::BetaDecision, 0.0),
            xi1: get(Param::Xi1, 0.0),
            xi2: get(Param::Xi2, 0.0),
            w0: get(Param::W0, crate::coordination::DEFAULT_W0),
        }
    }
}

/// A sampled decision.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub dist: ActionDist,
    /// Working-memory items retrieved for this decision.
    pub retrieved: usize,
    pub rt: f64,
    pub h_bwm: f64,
    pub h_ql: f64,
    /// Mixture weight in force for the decision.
    pub weight: Option<f64>,
}

/// The policy averaged over the agent's internal randomness.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub dist: ActionDist,
    pub expected_rt: f64,
    pub expected_retrieved: f64,
    pub h_bwm: f64,
    pub h_ql: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    pub delta: f64,
    pub encoded: bool,
}

/// A configured model that decides, learns from outcomes and tracks where it
/// is within the current problem.
#[derive(Clone, Debug)]
pub struct Agent {
    kind: ModelKind,
    flags: Variation,
    p: Resolved,
    granularity: MetaGranularity,
    q: QTable,
    wm: WmStore,
    mix: MixtureState,
    meta: Option<MetaEntropyTable>,
    anticipated: Option<WmAccumulator>,
    /// Accumulator read by the last decision; feeds the mixture likelihood.
    last_acc: Option<WmAccumulator>,
    phase: Phase,
    index_in_phase: u32,
}

impl Agent {
    pub fn new(cfg: &AgentConfig) -> Result<Self> {
        cfg.validate()?;
        let flags = cfg.flags()?;
        let p = Resolved::new(cfg, &flags);
        Ok(Agent {
            kind: cfg.model,
            flags,
            p,
            granularity: cfg.meta_granularity,
            q: QTable::new(),
            wm: WmStore::new(p.capacity, p.eta),
            mix: MixtureState::new(p.w0),
            meta: None,
            anticipated: None,
            last_acc: None,
            phase: Phase::Search,
            index_in_phase: 0,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn flags(&self) -> Variation {
        self.flags
    }

    pub fn q(&self) -> &QTable {
        &self.q
    }

    pub fn memory(&self) -> &WmStore {
        &self.wm
    }

    pub fn weight(&self) -> Option<f64> {
        (self.kind == ModelKind::Mixture).then_some(self.mix.w)
    }

    pub fn sigma(&self) -> f64 {
        self.p.sigma
    }

    pub fn trial_type(&self) -> TrialType {
        TrialType::new(self.phase, self.index_in_phase, self.granularity)
    }

    pub fn granularity(&self) -> MetaGranularity {
        self.granularity
    }

    /// Install the mean entropies used to bias retrieval. Only meta-learning
    /// variations read it.
    pub fn set_meta_table(&mut self, table: MetaEntropyTable) {
        self.meta = Some(table);
    }

    pub fn meta_table(&self) -> Option<&MetaEntropyTable> {
        self.meta.as_ref()
    }

    /// Start a new problem: Q-values reset unless the variation keeps them,
    /// working memory is emptied and the mixture weight carries over.
    pub fn on_new_problem(&mut self) {
        self.q = self.q.on_problem_boundary(&self.p.ql);
        self.wm.clear();
        self.anticipated = None;
        self.last_acc = None;
        self.phase = Phase::Search;
        self.index_in_phase = 0;
    }

    fn ql_dist(&self) -> ActionDist {
        self.q.softmax(self.p.ql.beta)
    }

    fn meta_bias(&self) -> Option<(f64, f64)> {
        if !self.flags.meta {
            return None;
        }
        self.meta.as_ref().map(|t| t.lookup(self.trial_type()))
    }

    fn start_acc(&mut self) -> WmAccumulator {
        self.anticipated.take().unwrap_or_default()
    }

    fn coord_inputs(&self, start: WmAccumulator) -> CoordInputs<'_> {
        CoordInputs {
            q: &self.q,
            beta_ql: self.p.ql.beta,
            beta_decision: self.p.beta_decision,
            store: &self.wm,
            params: self.p.coord,
            meta_bias: self.meta_bias(),
            start,
        }
    }

    /// Policy of the models whose decision has no internal randomness.
    fn fixed_policy(&mut self) -> (ActionDist, usize, f64, f64) {
        match self.kind {
            ModelKind::QLearning => {
                let d = self.ql_dist();
                (d, 0, H_MAX, d.entropy())
            }
            ModelKind::Coordination => unreachable!("coordination retrieval is stochastic"),
            ModelKind::WorkingMemory | ModelKind::Mixture => {
                let start = self.start_acc();
                let from = start.retrieved();
                let bwm = continue_retrieval(start, &self.wm, self.p.theta);
                let retrieved = bwm.retrieved - from;
                let h_bwm = bwm.acc.entropy();
                let p_ql = self.ql_dist();
                let dist = if self.kind == ModelKind::Mixture {
                    mixture_combine(&p_ql, &bwm.dist, self.mix.w)
                } else {
                    bwm.dist
                };
                self.last_acc = Some(bwm.acc);
                (dist, retrieved, h_bwm, p_ql.entropy())
            }
        }
    }

    /// Choose an action for the current trial.
    pub fn decide<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Decision {
        let weight = self.weight();
        let (dist, retrieved, h_bwm, h_ql) = if self.kind == ModelKind::Coordination {
            let start = self.start_acc();
            let d = coordination_decide(&self.coord_inputs(start), rng);
            (d.dist, d.retrieved, d.acc.entropy(), d.h_ql)
        } else {
            self.fixed_policy()
        };
        let action = dist.sample(rng);
        Decision { action, dist, retrieved, rt: simulated_rt(retrieved, dist.entropy(), self.p.sigma), h_bwm, h_ql, weight }
    }

    /// The choice distribution for the current trial with retrieval noise
    /// integrated out, plus expected reaction time. Consumes any anticipated
    /// accumulator just as [`Agent::decide`] does.
    pub fn evaluate(&mut self) -> Evaluation {
        if self.kind != ModelKind::Coordination {
            let (dist, retrieved, h_bwm, h_ql) = self.fixed_policy();
            return Evaluation {
                dist,
                expected_rt: simulated_rt(retrieved, dist.entropy(), self.p.sigma),
                expected_retrieved: retrieved as f64,
                h_bwm,
                h_ql,
            };
        }
        let start = self.start_acc();
        let outcomes = coordination_outcomes(&self.coord_inputs(start));
        let mut ev = Evaluation {
            dist: marginal_dist(&outcomes),
            expected_rt: 0.0,
            expected_retrieved: 0.0,
            h_bwm: 0.0,
            h_ql: self.ql_dist().entropy(),
        };
        for o in &outcomes {
            let d = &o.decision;
            ev.expected_rt += o.prob * simulated_rt(d.retrieved, d.dist.entropy(), self.p.sigma);
            ev.expected_retrieved += o.prob * d.retrieved as f64;
            ev.h_bwm += o.prob * d.acc.entropy();
        }
        ev
    }

    /// Learn from the outcome of `action`.
    ///
    /// Order: prediction error on the current values, gated encoding, value
    /// update and decay, mixture weight update, then anticipation.
    pub fn observe(&mut self, action: Action, rewarded: bool) -> Observation {
        let phase = self.phase;
        let delta = self.q.rpe(action, rewarded, self.p.ql.gamma);

        let likelihoods = (self.kind == ModelKind::Mixture).then(|| {
            let lb = self.last_acc.as_ref().map_or(0.5, |acc| acc.reward_likelihood(action, rewarded));
            (lb, ql_outcome_likelihood(self.q.get(action), rewarded))
        });

        let encoded = self.kind.uses_wm() && (!self.flags.thr || thr_gate(delta, self.p.xi1, self.p.xi2));
        if encoded {
            self.wm.encode(action, rewarded);
        }

        if self.kind.uses_q() {
            self.q = self.q.update(action, rewarded, self.p.ql.alpha, self.p.ql.gamma);
            if self.p.ql.decay_enabled {
                self.q = self.q.decay(self.p.ql.kappa);
            }
        }

        if let Some((lb, lq)) = likelihoods {
            self.mix.w = mixture_weight_update(self.mix.w, lb, lq);
        }

        if self.flags.ant && phase == Phase::Search && !rewarded {
            self.anticipated = Some(anticipate(&self.wm));
        }

        self.last_acc = None;
        if phase == Phase::Search && rewarded {
            self.phase = Phase::Repetition;
            self.index_in_phase = 0;
        } else {
            self.index_in_phase += 1;
        }
        Observation { delta, encoded }
    }

    /// Probability of the recorded choice and expected reaction time, then
    /// learn from the recorded outcome.
    pub fn teacher_forced_step(&mut self, record: &TrialRecord) -> Result<(f64, Evaluation)> {
        if record.rewarded != (record.action == record.correct) {
            return Err(Error::validation(format!(
                "trial {} of problem {}: reward does not match the choice",
                record.trial_index, record.problem_index
            )));
        }
        let ev = self.evaluate();
        let p = ev.dist.prob(record.action);
        self.observe(record.action, record.rewarded);
        Ok((p, ev))
    }

    /// Entropy record for meta-learning from an evaluation of the current
    /// trial. Call before [`Agent::observe`].
    pub fn entropy_log(&self, h_bwm: f64, h_ql: f64) -> EntropyLog {
        EntropyLog { trial_type: self.trial_type(), h_bwm, h_ql }
    }
}
