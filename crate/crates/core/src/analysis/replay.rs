use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{curve_of, empty_note, group_problems, mean_sem, pool, positions, MeanSem, Position, RepresentativeCurve, MAX_ERRORS};
use crate::agent::AgentConfig;
use crate::error::{Error, Result};
use crate::rng;
use crate::simulate::{simulate_session, SimTrial, DEFAULT_MAX_TRIALS};
use crate::task::{split_problems, ProblemSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub position: Position,
    pub retrieved: MeanSem,
    /// Mixture weight at decision time; mixture models only.
    pub weight: Option<MeanSem>,
    /// Fraction of trials whose outcome was written to working memory.
    pub update_probability: MeanSem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceGroup {
    pub errors: u32,
    pub points: Vec<TracePoint>,
}

/// How much each system contributed along the representative positions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContributionTrace {
    pub groups: Vec<TraceGroup>,
}

impl ContributionTrace {
    pub fn group(&self, errors: u32) -> Option<&TraceGroup> {
        self.groups.iter().find(|g| g.errors == errors)
    }

    fn of(problems: &[&[SimTrial]]) -> ContributionTrace {
        let groups = group_problems(problems, |t| &t.record)
            .into_iter()
            .enumerate()
            .filter(|(_, g)| !g.is_empty())
            .map(|(k, g)| {
                let points = positions(k as u32)
                    .into_iter()
                    .enumerate()
                    .map(|(i, position)| {
                        let retrieved: Vec<f64> = g.iter().map(|p| p[i].decision.retrieved as f64).collect();
                        let weights: Option<Vec<f64>> = g.iter().map(|p| p[i].decision.weight).collect();
                        let updates: Vec<f64> = g.iter().map(|p| p[i].encoded as u8 as f64).collect();
                        TracePoint {
                            position,
                            retrieved: mean_sem(&retrieved),
                            weight: weights.map(|w| mean_sem(&w)),
                            update_probability: mean_sem(&updates),
                        }
                    })
                    .collect();
                TraceGroup { errors: k as u32, points }
            })
            .collect();
        ContributionTrace { groups }
    }

    fn pool(reps: &[ContributionTrace]) -> ContributionTrace {
        let mut groups = Vec::new();
        for k in 0..=MAX_ERRORS {
            let present: Vec<&TraceGroup> = reps.iter().filter_map(|r| r.group(k)).collect();
            if present.is_empty() {
                continue;
            }
            let points = positions(k)
                .into_iter()
                .enumerate()
                .map(|(i, position)| {
                    let col = |f: &dyn Fn(&TracePoint) -> MeanSem| -> MeanSem {
                        pool(&present.iter().map(|g| f(&g.points[i])).collect::<Vec<_>>())
                    };
                    let weights: Option<Vec<MeanSem>> = present.iter().map(|g| g.points[i].weight).collect();
                    TracePoint {
                        position,
                        retrieved: col(&|p| p.retrieved),
                        weight: weights.map(|w| pool(&w)),
                        update_probability: col(&|p| p.update_probability),
                    }
                })
                .collect();
            groups.push(TraceGroup { errors: k, points });
        }
        ContributionTrace { groups }
    }
}

/// Output of a replay: pooled curve and trace, and every simulated trial
/// when requested.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Replay {
    pub curve: RepresentativeCurve,
    pub trace: ContributionTrace,
    /// One trial list per replicate.
    pub trials: Vec<Vec<SimTrial>>,
}

/// Let the agent play the same problem chain `n_reps` times, replicates in
/// parallel with seeds derived from `seed` and the replicate number.
/// Statistics are computed within each replicate and then averaged.
pub fn replay_simulate(cfg: &AgentConfig, chain: &[ProblemSpec], n_reps: usize, seed: u64, keep_trials: bool) -> Result<Replay> {
    if chain.is_empty() {
        return Err(Error::validation("replay needs at least one problem"));
    }
    let per_rep: Vec<(RepresentativeCurve, ContributionTrace, Vec<SimTrial>)> = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let trials = simulate_session(cfg, chain, rng::derive_seed(seed, &[r as u64]), DEFAULT_MAX_TRIALS)?;
            let problems = split_problems(&trials, |t| t.record.problem_index);
            let curve = curve_of(&problems, |t| &t.record);
            let trace = ContributionTrace::of(&problems);
            Ok((curve, trace, if keep_trials { trials } else { Vec::new() }))
        })
        .collect::<Result<_>>()?;
    let mut curves = Vec::with_capacity(n_reps);
    let mut traces = Vec::with_capacity(n_reps);
    let mut trials = Vec::new();
    for (c, t, raw) in per_rep {
        curves.push(c);
        traces.push(t);
        if keep_trials {
            trials.push(raw);
        }
    }
    let mut curve = RepresentativeCurve::pool(&curves);
    if n_reps == 0 {
        curve.notes = (0..=MAX_ERRORS).map(empty_note).collect();
    }
    Ok(Replay { curve, trace: ContributionTrace::pool(&traces), trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{ModelKind, Param, ParamVector};
    use crate::task::{generate_session, Phase};

    fn random_agent() -> AgentConfig {
        let params = ParamVector::new().with(Param::Alpha, 0.5).with(Param::Beta, 0.0).with(Param::Sigma, 1.0);
        AgentConfig::new(ModelKind::QLearning, 1, params)
    }

    #[test]
    fn replay_is_deterministic_and_independent_of_threads() {
        let chain = generate_session(&mut rng::stream(8), 10);
        let a = replay_simulate(&random_agent(), &chain, 6, 42, true).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| replay_simulate(&random_agent(), &chain, 6, 42, true).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.trials.len(), 6);
    }

    #[test]
    fn oracle_agent_repeats_perfectly() {
        let params = ParamVector::new()
            .with(Param::Capacity, 8.0)
            .with(Param::Theta, 0.01)
            .with(Param::Sigma, 1.0)
            .with(Param::Eta, 0.0);
        let cfg = AgentConfig::new(ModelKind::WorkingMemory, 1, params);
        let chain = generate_session(&mut rng::stream(9), 30);
        let r = replay_simulate(&cfg, &chain, 4, 1, false).unwrap();
        assert!(r.trials.is_empty());
        for g in &r.curve.groups {
            for p in g.points.iter().filter(|p| p.position.phase == Phase::Repetition) {
                assert_eq!(p.performance.mean, 1.0);
            }
        }
        // pure working memory writes every outcome
        for g in &r.trace.groups {
            assert!(g.points.iter().all(|p| p.update_probability.mean == 1.0 && p.weight.is_none()));
        }
    }

    #[test]
    fn empty_chain_is_rejected() {
        assert!(replay_simulate(&random_agent(), &[], 3, 0, false).is_err());
    }
}
