// Mean-square error against time for the bimolecular annihilation model,
// with pairwise orders averaged over a late time window.

use jumpsplit::experiments::{run_bimolecular, Experiment, ExperimentSpec};

pub fn run_example() -> jumpsplit::Result<()> {
    let mut spec = ExperimentSpec::paper(Experiment::Bimolecular);
    spec.samples = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(300);
    spec.max_samples = 0;
    let report = run_bimolecular(&spec)?;

    for row in report.error_vs_time.iter().filter(|r| r.t % 64.0 == 0.0) {
        println!("t={:>5} h={:<6} M={:>9.3}", row.t, row.h, row.estimate.mean);
    }
    for p in &report.pair_orders {
        println!(
            "order between h={} and h={}: {:.3}",
            p.h_coarse, p.h_fine, p.order
        );
    }
    for d in report
        .difference
        .iter()
        .filter(|d| d.t == 64.0 || d.t == 256.0)
    {
        println!(
            "U = X1 - X2 at t={}: mean {:.2} (expected {}), variance {:.0} (expected {})",
            d.t,
            d.u.mean,
            report.initial_difference,
            d.u.variance,
            2.0 * report.k1 * d.t
        );
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
