//! Fitting models to sessions.
//!
//! Two objectives are minimized together: the negative log-likelihood of the
//! recorded choices under teacher forcing, and the squared error between the
//! z-scored representative-step reaction-time curves of the model and of the
//! data. NSGA-II returns a Pareto front; one solution is picked by Chebyshev
//! aggregation and models are compared with BIC.

pub mod nsga2;
pub mod pareto;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, AgentConfig, ModelKind, Param, ParamVector, VariationSpec};
use crate::analysis::{replay_simulate, representative_steps, RepresentativeCurve};
use crate::coordination::{meta_learn, EntropyLog, MetaEntropyTable, MetaGranularity};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::policy::N_ACTIONS;
use crate::task::{ProblemSpec, TrialRecord};

pub use nsga2::{nsga2, Individual, Nsga2Config};

/// Floor on predicted probabilities inside the log-likelihood.
pub const PROB_FLOOR: f64 = 1e-10;

fn teacher_force_pass(cfg: &AgentConfig, data: &Dataset, meta: Option<&MetaEntropyTable>) -> Result<(f64, Vec<EntropyLog>)> {
    let mut negll = 0.0;
    let mut logs = Vec::new();
    for session in &data.sessions {
        let mut agent = Agent::new(cfg)?;
        if let Some(t) = meta {
            agent.set_meta_table(t.clone());
        }
        let mut current = None;
        for t in &session.trials {
            if current != Some(t.problem_index) {
                agent.on_new_problem();
                current = Some(t.problem_index);
            }
            let log_now = agent.trial_type();
            let (p, ev) = agent.teacher_forced_step(t)?;
            negll -= p.max(PROB_FLOOR).ln();
            logs.push(EntropyLog { trial_type: log_now, h_bwm: ev.h_bwm, h_ql: ev.h_ql });
        }
    }
    Ok((negll, logs))
}

/// `-sum ln p(recorded choice)` with the agent learning from the recorded
/// outcomes. Meta-learning variations first learn their entropy table from
/// an unbiased pass over the same data.
pub fn choice_negll(cfg: &AgentConfig, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::validation("cannot compute a likelihood on an empty dataset"));
    }
    let (negll, logs) = teacher_force_pass(cfg, data, None)?;
    if !cfg.flags()?.meta {
        return Ok(negll);
    }
    let table = meta_learn(&logs, cfg.meta_granularity);
    Ok(teacher_force_pass(cfg, data, Some(&table))?.0)
}

fn zscore(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd > 0.0 && sd.is_finite() {
        xs.iter().map(|x| (x - mean) / sd).collect()
    } else {
        vec![0.0; xs.len()]
    }
}

/// Mean squared difference between the z-scored reaction-time curves. Both
/// curves must cover the same positions.
pub fn rt_objective(model: &RepresentativeCurve, data: &RepresentativeCurve) -> Result<f64> {
    let m = model.rt_points();
    let d = data.rt_points();
    if m.is_empty() || m.len() != d.len() || m.iter().zip(&d).any(|(a, b)| a.0 != b.0) {
        return Err(Error::CurveMismatch(format!(
            "model curve has {} reaction-time positions, data curve {}, or they differ",
            m.len(),
            d.len()
        )));
    }
    let zm = zscore(&m.iter().map(|p| p.1).collect::<Vec<_>>());
    let zd = zscore(&d.iter().map(|p| p.1).collect::<Vec<_>>());
    Ok(zm.iter().zip(&zd).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / zm.len() as f64)
}

/// [`rt_objective`] on the positions both curves have; infinite when they
/// share none.
pub fn shared_rt_objective(model: &RepresentativeCurve, data: &RepresentativeCurve) -> f64 {
    let restrict = |c: &RepresentativeCurve, other: &RepresentativeCurve| {
        let keep = other.rt_points();
        let mut out = c.clone();
        for g in out.groups.iter_mut() {
            g.points.retain(|p| keep.iter().any(|k| k.0 == (g.errors, p.position)));
        }
        out.groups.retain(|g| !g.points.is_empty());
        out
    };
    let m = restrict(model, data);
    let d = restrict(data, &m);
    rt_objective(&m, &d).unwrap_or(f64::INFINITY)
}

/// `2 negll + k ln n`
pub fn bic(negll: f64, k_params: usize, n_trials: usize) -> f64 {
    2.0 * negll + k_params as f64 * (n_trials as f64).ln()
}

fn default_population() -> usize {
    Nsga2Config::default().population
}

fn default_generations() -> usize {
    Nsga2Config::default().generations
}

fn default_replicates() -> usize {
    64
}

fn default_final_replicates() -> usize {
    1000
}

fn default_crossover() -> f64 {
    Nsga2Config::default().crossover_probability
}

/// Settings of a fitting run, as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRunConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub variation: VariationSpec,
    /// Overrides of the default search bounds, `{param: [lo, hi]}`.
    #[serde(default)]
    pub bounds: BTreeMap<Param, (f64, f64)>,
    #[serde(default = "default_population")]
    pub population: usize,
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default)]
    pub seed: u64,
    /// Replay replicates per candidate for the reaction-time curve; 0 fits
    /// choices only.
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Replicates used to re-evaluate the final front; 0 skips it.
    #[serde(default = "default_final_replicates")]
    pub final_replicates: usize,
    #[serde(default = "default_crossover")]
    pub crossover_probability: f64,
    #[serde(default)]
    pub mutation_probability: Option<f64>,
    #[serde(default)]
    pub meta_granularity: MetaGranularity,
}

impl FitRunConfig {
    pub fn new(model: ModelKind, variation: u8) -> Self {
        FitRunConfig {
            model,
            variation: VariationSpec::Numbered(variation),
            bounds: BTreeMap::new(),
            population: default_population(),
            generations: default_generations(),
            seed: 0,
            replicates: default_replicates(),
            final_replicates: default_final_replicates(),
            crossover_probability: default_crossover(),
            mutation_probability: None,
            meta_granularity: MetaGranularity::default(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::config(e.to_string()))
    }

    /// Agent configuration with the given parameter values.
    pub fn agent(&self, params: ParamVector) -> AgentConfig {
        AgentConfig { model: self.model, variation: self.variation, params, meta_granularity: self.meta_granularity }
    }

    /// Free parameters and their search bounds, checked against the
    /// admissible ranges.
    pub fn search_space(&self) -> Result<Vec<(Param, (f64, f64))>> {
        let free = self.agent(ParamVector::new()).free_parameters()?;
        if let Some(p) = self.bounds.keys().find(|p| !free.contains(p)) {
            return Err(Error::config(format!("bounds given for {p}, which {} does not use", self.model)));
        }
        free.into_iter()
            .map(|p| {
                let (lo, hi) = self.bounds.get(&p).copied().unwrap_or_else(|| p.default_bounds());
                let (dlo, dhi) = p.default_bounds();
                if !(lo <= hi && lo >= dlo && hi <= dhi) {
                    return Err(Error::config(format!("bounds [{lo}, {hi}] for {p} must lie within [{dlo}, {dhi}]")));
                }
                Ok((p, (lo, hi)))
            })
            .collect()
    }

    fn nsga(&self) -> Nsga2Config {
        Nsga2Config {
            population: self.population,
            generations: self.generations,
            crossover_probability: self.crossover_probability,
            mutation_probability: self.mutation_probability,
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub model: ModelKind,
    pub variation: VariationSpec,
    pub params: ParamVector,
    pub negll: f64,
    pub rt_mse: f64,
}

impl Solution {
    pub fn objectives(&self) -> [f64; 2] {
        [self.negll, self.rt_mse]
    }

    pub fn config(&self) -> AgentConfig {
        AgentConfig {
            model: self.model,
            variation: self.variation,
            params: self.params.clone(),
            meta_granularity: MetaGranularity::default(),
        }
    }
}

/// The whole problem chain of a dataset, sessions one after another.
pub fn dataset_chain(data: &Dataset) -> Vec<ProblemSpec> {
    data.sessions
        .iter()
        .flat_map(|s| s.problem_specs())
        .enumerate()
        .map(|(i, mut p)| {
            p.index = i;
            p
        })
        .collect()
}

/// Representative-step curve of a whole dataset.
pub fn dataset_curve(data: &Dataset) -> RepresentativeCurve {
    let problems: Vec<&[TrialRecord]> = data.sessions.iter().flat_map(|s| s.problems()).collect();
    representative_steps(&problems)
}

struct Objective<'a> {
    run: &'a FitRunConfig,
    data: &'a Dataset,
    rt: Option<(Vec<ProblemSpec>, RepresentativeCurve)>,
}

impl Objective<'_> {
    fn eval(&self, params: ParamVector, seed: u64, reps: usize) -> Result<[f64; 2]> {
        let cfg = self.run.agent(params);
        let negll = choice_negll(&cfg, self.data)?;
        let rt = match &self.rt {
            Some((chain, curve)) if reps > 0 => {
                let replay = replay_simulate(&cfg, chain, reps, seed, false)?;
                shared_rt_objective(&replay.curve, curve)
            }
            _ => 0.0,
        };
        Ok([negll, rt])
    }
}

/// Fit a model with NSGA-II and return the Pareto front, best likelihood
/// first. Reaction times enter only when the dataset has them and
/// `replicates > 0`; otherwise the second objective is 0.
pub fn nsga2_fit(run: &FitRunConfig, data: &Dataset) -> Result<Vec<Solution>> {
    if data.is_empty() {
        return Err(Error::validation("cannot fit an empty dataset"));
    }
    let space = run.search_space()?;
    let use_rt = data.rt_available && run.replicates > 0;
    let obj = Objective { run, data, rt: use_rt.then(|| (dataset_chain(data), dataset_curve(data))) };
    let params_of = |x: &[f64]| -> ParamVector { space.iter().zip(x).map(|((p, _), v)| (*p, *v)).collect() };
    let bounds: Vec<(f64, f64)> = space.iter().map(|(_, b)| *b).collect();

    let front = nsga2(&bounds, &run.nsga(), |x, seed| {
        obj.eval(params_of(x), seed, run.replicates).map_or(vec![f64::INFINITY; 2], |o| o.to_vec())
    });

    let mut solutions: Vec<Solution> = front
        .into_iter()
        .map(|ind| {
            let params = params_of(&ind.x);
            let [negll, rt_mse] = if use_rt && run.final_replicates > 0 {
                let seed = crate::rng::derive_seed(run.seed, &[2]);
                obj.eval(params.clone(), seed, run.final_replicates).unwrap_or([f64::INFINITY; 2])
            } else {
                [ind.objectives[0], ind.objectives[1]]
            };
            Solution { model: run.model, variation: run.variation, params, negll, rt_mse }
        })
        .collect();
    if run.final_replicates > 0 {
        let objs: Vec<Vec<f64>> = solutions.iter().map(|s| s.objectives().to_vec()).collect();
        let keep = pareto::pareto_indices(&objs);
        solutions = keep.into_iter().map(|i| solutions[i].clone()).collect();
    }
    solutions.sort_by(|a, b| a.negll.total_cmp(&b.negll));
    Ok(solutions)
}

/// Weights and augmentation term of the Chebyshev aggregation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevConfig {
    pub weights: [f64; 2],
    pub epsilon: f64,
}

impl Default for ChebyshevConfig {
    fn default() -> Self {
        ChebyshevConfig { weights: [0.5, 0.5], epsilon: 1e-3 }
    }
}

/// Augmented Chebyshev score of each point, objectives normalized so the
/// best value in the set maps to 0 and the worst to 1. A dimension where all
/// points agree contributes 0.
pub fn chebyshev_scores(objs: &[[f64; 2]], cfg: &ChebyshevConfig) -> Vec<f64> {
    let ideal: [f64; 2] = std::array::from_fn(|i| objs.iter().map(|o| o[i]).fold(f64::INFINITY, f64::min));
    let nadir: [f64; 2] = std::array::from_fn(|i| objs.iter().map(|o| o[i]).fold(f64::NEG_INFINITY, f64::max));
    objs.iter()
        .map(|o| {
            let terms: [f64; 2] = std::array::from_fn(|i| {
                let span = nadir[i] - ideal[i];
                let norm = if span > 0.0 && span.is_finite() { (o[i] - ideal[i]) / span } else { 0.0 };
                cfg.weights[i] * norm
            });
            terms[0].max(terms[1]) + cfg.epsilon * (terms[0] + terms[1])
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selected {
    pub index: usize,
    pub score: f64,
    pub solution: Solution,
}

/// The front member with the lowest Chebyshev score; ties go to the first.
pub fn chebyshev_rank(front: &[Solution], cfg: &ChebyshevConfig) -> Result<Selected> {
    if front.is_empty() {
        return Err(Error::validation("empty Pareto front"));
    }
    let objs: Vec<[f64; 2]> = front.iter().map(Solution::objectives).collect();
    let scores = chebyshev_scores(&objs, cfg);
    let (index, score) = scores
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, s)| if s < best.1 { (i, s) } else { best });
    Ok(Selected { index, score, solution: front[index].clone() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BicRow {
    pub model: String,
    pub k: usize,
    pub negll: f64,
    pub n_trials: usize,
    pub bic: f64,
}

/// BIC of each configuration on `data`, after a row for the uniformly
/// random chooser.
pub fn bic_table(configs: &[AgentConfig], data: &Dataset) -> Result<Vec<BicRow>> {
    let n = data.n_trials();
    if n == 0 {
        return Err(Error::validation("cannot compute BIC on an empty dataset"));
    }
    let random = n as f64 * (N_ACTIONS as f64).ln();
    let mut rows = vec![BicRow { model: "random".into(), k: 0, negll: random, n_trials: n, bic: bic(random, 0, n) }];
    for cfg in configs {
        let k = cfg.free_parameters()?.len();
        let negll = choice_negll(cfg, data)?;
        let name = match cfg.variation {
            VariationSpec::Numbered(v) => format!("{} V{v}", cfg.model),
            VariationSpec::Flags(_) => cfg.model.to_string(),
        };
        rows.push(BicRow { model: name, k, negll, n_trials: n, bic: bic(negll, k, n) });
    }
    Ok(rows)
}
