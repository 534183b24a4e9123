// Mean-square error of the Lie split against step size for the
// birth-death model, and the fitted strong order.

use jumpsplit::{builtin, CoupledEnsemble, CoupledSetup, ErrorNorm, KernelSpec, StreamSeedPlan};

pub fn run_example() -> jumpsplit::Result<()> {
    let samples: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1000);
    let model = builtin("birth_death")?;
    let setup = CoupledSetup::new(
        &model.network,
        model.require_partition()?,
        &model.initial_state,
    );
    let hs: Vec<f64> = (0..6).map(|k| 0.5f64.powi(k)).collect();
    let specs = hs
        .iter()
        .map(|&h| KernelSpec::lie(h))
        .collect::<jumpsplit::Result<Vec<_>>>()?;

    let ens = CoupledEnsemble::run(&setup, &specs, &[100.0], samples, &StreamSeedPlan::new(1))?;
    let table = ens.strong_table(0, &ErrorNorm::Euclidean);
    println!("{:>9} {:>10} {:>10}", "h", "M", "S/sqrt(N)");
    for row in &table.rows {
        println!(
            "{:>9} {:>10.4} {:>10.4}",
            row.h, row.estimate.mean, row.estimate.half_width
        );
    }
    println!(
        "strong order over the three smallest h: {:.3}",
        table.strong_order((0.0, 0.126))?
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
