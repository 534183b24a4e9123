// Birth-death kinetics on a line of cells with diffusive hopping, split
// into reactions and diffusion.

use jumpsplit::spatial::{flatten, reaction_diffusion_partition, Mesh};
use jumpsplit::{
    builtin, simulate_exact, simulate_split, KernelSpec, SimOptions, State, StreamSeedPlan,
};

pub fn run_example() -> jumpsplit::Result<()> {
    let model = builtin("birth_death")?;
    let cells = 5;
    let mesh = Mesh::line(cells, &[0.5], 1.0)?;
    let spatial = flatten(&model.network, &mesh)?;
    println!(
        "{} cells: {} species, {} reaction channels, {} diffusion channels",
        cells,
        spatial.flattened.species_count(),
        spatial.reaction_channel_count(),
        spatial.diffusion_channel_count()
    );

    let mut x0 = vec![0; cells];
    x0[spatial.species_index(0, 0)] = 250;
    let x0 = State::new(x0);
    let part = reaction_diffusion_partition(&spatial);
    let mut paths = StreamSeedPlan::new(4).derive_paths(0, spatial.flattened.channel_count())?;
    let exact = simulate_exact(
        &spatial.flattened,
        &x0,
        40.0,
        &mut paths,
        &SimOptions::default(),
    )?;
    let split = simulate_split(
        &spatial.flattened,
        &part,
        &KernelSpec::strang(0.5)?,
        &x0,
        40.0,
        &mut paths,
        &SimOptions::default(),
    )?;
    for t in [0.0, 5.0, 10.0, 20.0, 40.0] {
        let a = exact.state_at(&spatial.flattened, t)?;
        let b = split.state_at(&spatial.flattened, t)?;
        println!("t={t:>4}: exact {:?}  split {:?}", a.counts(), b.counts());
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
