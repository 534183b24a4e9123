// Exact simulation of the birth-death model and a check of its long-run
// mean against the stationary value `k / mu = 100`.

use jumpsplit::{builtin, simulate_exact, SimOptions, StreamSeedPlan};

pub fn run_example() -> jumpsplit::Result<()> {
    let model = builtin("birth_death")?;
    let plan = StreamSeedPlan::new(7);

    let mut paths = plan.derive_paths(0, model.network.channel_count())?;
    let traj = simulate_exact(
        &model.network,
        &model.initial_state,
        100.0,
        &mut paths,
        &SimOptions::default(),
    )?;
    let counts = traj.firing_counts(model.network.channel_count());
    println!(
        "one run on [0, 100]: {} events ({} births, {} deaths), X(100) = {}",
        traj.event_count(),
        counts[0],
        counts[1],
        traj.final_state[0]
    );
    for t in [0.0, 25.0, 50.0, 75.0, 100.0] {
        println!("  X({t:>5}) = {}", traj.state_at(&model.network, t)?[0]);
    }

    let runs = 500;
    let mut mean = 0.0;
    for id in 1..=runs {
        let mut paths = plan.derive_paths(id, model.network.channel_count())?;
        let traj = simulate_exact(
            &model.network,
            &model.initial_state,
            200.0,
            &mut paths,
            &SimOptions::default(),
        )?;
        mean += traj.final_state[0] as f64 / runs as f64;
    }
    println!("ensemble mean of X(200) over {runs} runs: {mean:.2} (stationary mean 100)");
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
