//! Fit the four model families on one dataset and compare them by BIC.

use wmrl::data::synth_generate;
use wmrl::fitting::{bic_table, nsga2_fit, FitRunConfig};
use wmrl::{AgentConfig, ModelKind};

fn main() -> wmrl::Result<()> {
    let truth = AgentConfig::from_json(
        r#"{"model": "Mixture", "variation": 1,
            "params": {"alpha": 0.4, "beta": 8, "sigma": 1, "N": 3, "theta": 0.5, "eta": 0.2, "w0": 0.5}}"#,
    )?;
    let data = synth_generate(&truth, 100, 5)?;
    let mut fitted = Vec::new();
    for kind in ModelKind::ALL {
        let mut run = FitRunConfig::new(kind, 1);
        run.population = 24;
        run.generations = 15;
        run.replicates = 0;
        fitted.push(nsga2_fit(&run, &data)?[0].config());
    }
    for row in bic_table(&fitted, &data)? {
        println!("{:<14} k={}  negll {:9.2}  bic {:9.2}", row.model, row.k, row.negll, row.bic);
    }
    Ok(())
}
