// Lie and Strang splits on the same coupled samples. The Strang kernel is
// the Lie kernel shifted by a quarter step.

use jumpsplit::{builtin, CoupledEnsemble, CoupledSetup, ErrorNorm, KernelSpec, StreamSeedPlan};

pub fn run_example() -> jumpsplit::Result<()> {
    let samples: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1000);
    for name in ["birth_death", "dimerization"] {
        let model = builtin(name)?;
        let setup = CoupledSetup::new(
            &model.network,
            model.require_partition()?,
            &model.initial_state,
        );
        let hs = [1.0, 0.5, 0.25];
        let mut specs = Vec::new();
        for &h in &hs {
            specs.push(KernelSpec::lie(h)?);
            specs.push(KernelSpec::strang(h)?);
        }
        let ens = CoupledEnsemble::run(&setup, &specs, &[100.0], samples, &StreamSeedPlan::new(5))?;
        println!("{name}");
        for (i, &h) in hs.iter().enumerate() {
            let lie = ens.strong(2 * i, 0, &ErrorNorm::Euclidean).mean;
            let strang = ens.strong(2 * i + 1, 0, &ErrorNorm::Euclidean).mean;
            println!(
                "  h={h:<5} Lie {lie:>8.4}  Strang {strang:>8.4}  ratio {:>6.1}",
                lie / strang
            );
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
