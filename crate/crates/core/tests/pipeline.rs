use wmrl::analysis::{replay_simulate, representative_steps};
use wmrl::data::{load_sessions, synth_generate, synth_to_file};
use wmrl::fitting::{choice_negll, nsga2_fit, FitRunConfig};
use wmrl::task::generate_session;
use wmrl::{rng, AgentConfig, ModelKind, Param, ParamVector, Phase};

fn bwm(theta: f64, sigma: f64) -> AgentConfig {
    AgentConfig::new(
        ModelKind::WorkingMemory,
        1,
        ParamVector::new().with(Param::Capacity, 10.0).with(Param::Theta, theta).with(Param::Sigma, sigma).with(Param::Eta, 0.1),
    )
}

fn coordination() -> AgentConfig {
    AgentConfig::new(
        ModelKind::Coordination,
        5,
        ParamVector::new()
            .with(Param::Alpha, 0.5)
            .with(Param::Beta, 6.0)
            .with(Param::Sigma, 1.5)
            .with(Param::Capacity, 6.0)
            .with(Param::Eta, 0.2)
            .with(Param::Lambda1, 3.0)
            .with(Param::Lambda2, 1.0)
            .with(Param::BetaDecision, 8.0)
            .with(Param::Gamma, 0.2)
            .with(Param::Kappa, 0.9),
    )
}

#[test]
fn synthetic_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let written = synth_to_file(&coordination(), 40, 3, &path).unwrap();
    let read = load_sessions(&path).unwrap();
    assert_eq!(read, written);
    assert!(read.rt_available);
}

#[test]
fn generation_and_replay_are_deterministic() {
    assert_eq!(synth_generate(&coordination(), 25, 8).unwrap(), synth_generate(&coordination(), 25, 8).unwrap());
    let chain = generate_session(&mut rng::stream(2), 20);
    let a = replay_simulate(&coordination(), &chain, 12, 4, false).unwrap();
    let b = replay_simulate(&coordination(), &chain, 12, 4, false).unwrap();
    assert_eq!(a.curve, b.curve);
    assert_eq!(a.trace, b.trace);
}

#[test]
fn replay_summaries_stay_in_range() {
    let chain = generate_session(&mut rng::stream(6), 30);
    let r = replay_simulate(&coordination(), &chain, 10, 1, true).unwrap();
    for g in &r.curve.groups {
        for p in &g.points {
            assert!((0.0..=1.0).contains(&p.performance.mean));
        }
    }
    for g in &r.trace.groups {
        for p in &g.points {
            assert!(p.retrieved.mean >= 0.0);
            assert!((0.0..=1.0).contains(&p.update_probability.mean));
        }
    }
    for t in r.trials.iter().flatten() {
        assert!(t.decision.dist.probs().iter().all(|p| (0.0..=1.0).contains(p)));
    }
}

#[test]
fn single_replicate_replay_matches_direct_aggregation() {
    let chain = generate_session(&mut rng::stream(9), 40);
    let r = replay_simulate(&bwm(0.5, 1.0), &chain, 1, 3, true).unwrap();
    let records: Vec<_> = r.trials[0].iter().map(|t| t.record.clone()).collect();
    let problems: Vec<&[_]> = records.chunk_by(|a, b| a.problem_index == b.problem_index).collect();
    let direct = representative_steps(&problems);
    assert_eq!(direct.groups, r.curve.groups);
}

#[test]
fn exhaustive_retrieval_slows_search_trials() {
    let data = synth_generate(&bwm(0.0, 3.0), 80, 5).unwrap();
    for p in data.sessions[0].problems() {
        let rts: Vec<f64> = p.iter().filter(|t| t.phase == Phase::Search).map(|t| t.rt.unwrap()).collect();
        assert!(rts.windows(2).all(|w| w[1] > w[0]), "{rts:?}");
    }
}

#[test]
fn fitting_recovers_a_low_noise_q_learner() {
    let truth = AgentConfig::new(
        ModelKind::QLearning,
        1,
        ParamVector::new().with(Param::Alpha, 0.5).with(Param::Beta, 12.0).with(Param::Sigma, 1.0),
    );
    let data = synth_generate(&truth, 80, 13).unwrap();
    let mut run = FitRunConfig::new(ModelKind::QLearning, 1);
    run.population = 24;
    run.generations = 20;
    run.replicates = 0;
    let best = &nsga2_fit(&run, &data).unwrap()[0];
    let generating = choice_negll(&truth, &data).unwrap();
    assert!(best.negll <= generating * 1.02, "{} vs {generating}", best.negll);
    assert!(best.negll < data.n_trials() as f64 * 4f64.ln());
}
