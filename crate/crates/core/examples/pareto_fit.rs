//! Fit a Q-learner on choices and reaction times, then pick one solution
//! from the front.

use wmrl::data::synth_generate;
use wmrl::fitting::{chebyshev_rank, nsga2_fit, ChebyshevConfig, FitRunConfig};
use wmrl::{AgentConfig, ModelKind, Param, ParamVector};

fn main() -> wmrl::Result<()> {
    let truth = AgentConfig::new(
        ModelKind::QLearning,
        1,
        ParamVector::new().with(Param::Alpha, 0.3).with(Param::Beta, 8.0).with(Param::Sigma, 1.0),
    );
    let data = synth_generate(&truth, 60, 1)?;
    let mut run = FitRunConfig::new(ModelKind::QLearning, 1);
    run.population = 32;
    run.generations = 20;
    run.replicates = 8;
    let front = nsga2_fit(&run, &data)?;
    for s in &front {
        let params: Vec<String> = s.params.iter().map(|(p, v)| format!("{p}={v:.3}")).collect();
        println!("negll {:8.2}  rt mse {:.4}  {}", s.negll, s.rt_mse, params.join(" "));
    }
    let picked = chebyshev_rank(&front, &ChebyshevConfig::default())?;
    println!("selected #{} with score {:.4}", picked.index, picked.score);
    Ok(())
}
