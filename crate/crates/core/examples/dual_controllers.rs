//! Run the mixture and coordination controllers on the same problems and
//! compare their internal variables.

use wmrl::simulate::{simulate_session, DEFAULT_MAX_TRIALS};
use wmrl::task::generate_session;
use wmrl::{rng, AgentConfig, ModelKind, Param, ParamVector};

fn main() -> wmrl::Result<()> {
    let chain = generate_session(&mut rng::stream(3), 6);
    let mixture = AgentConfig::new(
        ModelKind::Mixture,
        1,
        ParamVector::new()
            .with(Param::Alpha, 0.4)
            .with(Param::Beta, 6.0)
            .with(Param::Sigma, 1.0)
            .with(Param::Capacity, 4.0)
            .with(Param::Theta, 0.5)
            .with(Param::Eta, 0.1)
            .with(Param::W0, 0.5),
    );
    let coordination = AgentConfig::new(
        ModelKind::Coordination,
        1,
        ParamVector::new()
            .with(Param::Alpha, 0.4)
            .with(Param::Beta, 6.0)
            .with(Param::Sigma, 1.0)
            .with(Param::Capacity, 4.0)
            .with(Param::Eta, 0.1)
            .with(Param::Lambda1, 4.0)
            .with(Param::Lambda2, 1.0)
            .with(Param::BetaDecision, 10.0),
    );
    for cfg in [&mixture, &coordination] {
        println!("{}", cfg.model);
        for t in simulate_session(cfg, &chain, 1, DEFAULT_MAX_TRIALS)?.iter().take(14) {
            let r = &t.record;
            println!(
                "  problem {} trial {} {:?}: chose {:?} reward {} retrieved {} rt {:.2} weight {}",
                r.problem_index,
                r.trial_index,
                r.phase,
                r.action,
                r.rewarded,
                t.decision.retrieved,
                t.decision.rt,
                t.decision.weight.map_or("-".into(), |w| format!("{w:.3}"))
            );
        }
    }
    Ok(())
}
