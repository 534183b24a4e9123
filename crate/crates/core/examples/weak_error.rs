// Weak errors of the first two factorial moments for dimerization,
// reusing coupled samples. Estimates whose sign is lost in the noise are
// flagged.

use jumpsplit::stats::fit_order;
use jumpsplit::stats::DEFAULT_UNCERTAINTY_MULTIPLIER;
use jumpsplit::{builtin, CoupledEnsemble, CoupledSetup, KernelSpec, Observable, StreamSeedPlan};

pub fn run_example() -> jumpsplit::Result<()> {
    let samples: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1000);
    let model = builtin("dimerization")?;
    let setup = CoupledSetup::new(
        &model.network,
        model.require_partition()?,
        &model.initial_state,
    );
    let hs = [1.0, 0.5, 0.25, 0.125];
    let specs = hs
        .iter()
        .map(|&h| KernelSpec::lie(h))
        .collect::<jumpsplit::Result<Vec<_>>>()?;
    let ens = CoupledEnsemble::run(&setup, &specs, &[100.0], samples, &StreamSeedPlan::new(2))?;

    for f in [
        Observable::FirstFactorial { species: 0 },
        Observable::SecondFactorial { species: 0 },
    ] {
        let mut points = Vec::new();
        for (k, &h) in hs.iter().enumerate() {
            let w = ens.weak(k, 0, f, DEFAULT_UNCERTAINTY_MULTIPLIER);
            let flag = if w.sign_determined() {
                ""
            } else {
                "  (sign undetermined)"
            };
            println!(
                "{} h={h:<6} {:>9.3} ± {:.3}{flag}",
                f.name(),
                w.estimate,
                w.half_width
            );
            if w.sign_determined() {
                points.push((h, w.estimate.abs()));
            }
        }
        match fit_order(&points, (0.0, f64::INFINITY)) {
            Ok(q) => println!("{} weak order {q:.2}", f.name()),
            Err(e) => println!("{} weak order not determined: {e}", f.name()),
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
