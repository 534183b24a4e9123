// Defining a model in JSON, including a custom propensity, and fitting
// the growth constants of its drift and quadratic variation.

use jumpsplit::{fit_assumption_constants, simulate_exact, ModelFile, SimOptions, StreamSeedPlan};

const MODEL: &str = r#"{
  "name": "enzyme_pool",
  "description": "Substrate supply, saturating conversion and product decay.",
  "species": ["S", "P"],
  "channels": [
    { "name": "supply", "stoich": [-1, 0], "propensity": { "mass_action": { "rate": 4.0, "reactants": [0, 0] } } },
    { "name": "convert", "stoich": [1, -1],
      "propensity": { "custom": { "form": "michaelis_menten", "vmax": 6.0, "km": 20.0, "species": 0 } } },
    { "name": "decay", "stoich": [0, 1], "propensity": { "mass_action": { "rate": 0.1, "reactants": [0, 1] } } }
  ],
  "initial_state": [0, 0],
  "split": { "first": [0, 2], "second": [1] }
}"#;

pub fn run_example() -> jumpsplit::Result<()> {
    let file = ModelFile::from_json(MODEL)?;
    let model = file.build()?;
    for r in 0..model.network.channel_count() {
        println!(
            "{:<8} stoich {:?}",
            model.network.channel_name(r).unwrap_or("-"),
            model.network.stoich_column(r)
        );
    }
    let fit = fit_assumption_constants(&model.network, &model.weights, 300.0)?;
    println!(
        "A = {:.3}, alpha = {:.3}, B = {:.3}, beta1 = {:.3}, beta2 = {:.4}, L = {:?}",
        fit.a, fit.alpha, fit.b, fit.beta1, fit.beta2, fit.lipschitz
    );
    println!(
        "bound violated at: {:?}",
        fit.verify(&model.network, &model.weights)?
    );

    let mut paths = StreamSeedPlan::new(0).derive_paths(0, model.network.channel_count())?;
    let traj = simulate_exact(
        &model.network,
        &model.initial_state,
        100.0,
        &mut paths,
        &SimOptions::default(),
    )?;
    println!(
        "state at t = 100: {:?} after {} events",
        traj.final_state.counts(),
        traj.event_count()
    );
    println!(
        "{}",
        file.to_json()
            .lines()
            .take(4)
            .collect::<Vec<_>>()
            .join("\n")
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
