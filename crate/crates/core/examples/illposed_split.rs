// A split whose second group is ill-posed on its own.
//
// The second group (3X -> X, 3X -> 4X) has zero drift, yet run alone its
// variance runs away even when stopped at 1000; the full network is
// strongly dissipative. The split still converges, slowly.

use jumpsplit::experiments::{run_illposed, Experiment, ExperimentSpec};
use jumpsplit::{
    builtin, simulate_exact, ReactionNetwork, SimOptions, State, StopRule, StreamSeedPlan,
};

pub fn run_example() -> jumpsplit::Result<()> {
    let model = builtin("illposed")?;
    let second = model.require_partition()?.second().to_vec();
    let channels = second
        .iter()
        .map(|&r| model.network.channel(r).cloned())
        .collect::<jumpsplit::Result<Vec<_>>>()?;
    let sub = ReactionNetwork::new(1, channels)?;
    let options = SimOptions::default().with_stop(StopRule {
        weights: model.weights.clone(),
        threshold: 1000.0,
    });
    let plan = StreamSeedPlan::new(9);
    let x0 = State::new(vec![10]);
    let horizon = 10f64.powi(-3) / 3.0;
    for t in [horizon, 10.0 * horizon, 100.0 * horizon, 1000.0 * horizon] {
        let runs = 2000;
        let mut values = Vec::with_capacity(runs);
        for id in 0..runs as u64 {
            let mut paths = plan.derive_paths(id, 2)?;
            values.push(simulate_exact(&sub, &x0, t, &mut paths, &options)?.final_state[0] as f64);
        }
        let mean = values.iter().sum::<f64>() / runs as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        println!("second group alone, t = {t:.2e}: mean {mean:.2}, variance {var:.1}");
    }

    let mut spec = ExperimentSpec::quick(Experiment::IllPosed);
    spec.samples = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(400);
    let report = run_illposed(&spec)?;
    for (row, stopped) in report.table.rows.iter().zip(&report.stopped) {
        println!(
            "h={:.2e} M={:.4} ({stopped} runs hit the cap)",
            row.h, row.estimate.mean
        );
    }
    println!(
        "strong order over the larger half of h: {:.3}",
        report.order
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
