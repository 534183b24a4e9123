// Reproducible per-channel Poisson paths and the operational clock of a
// channel that is paused and resumed.

use jumpsplit::exact::FrozenClock;
use jumpsplit::{reactivate_channel, ChannelClock, PoissonPath, StreamSeedPlan};

pub fn run_example() -> jumpsplit::Result<()> {
    let plan = StreamSeedPlan::new(2024);
    let mut path = plan.derive_path(3, 1)?;
    println!("stream {} of seed {}", path.stream(), path.seed());
    println!("first arrivals: {:?}", path.prefix(4));
    println!(
        "count(10) = {}, next arrival after 10 = {:.3}",
        path.count(10.0),
        path.next_arrival_after(10.0)
    );

    let mut again = plan.derive_path(3, 1)?;
    assert_eq!(again.prefix(4), path.prefix(4));
    let other: &mut PoissonPath = &mut plan.derive_path(4, 1)?;
    println!("trajectory 4 starts at {:.3} instead", other.arrival(1));

    // A channel at rate 5 paused at t = 2 with its next firing due at 3,
    // resumed at rate 1: the remaining operational time 5 takes 5 units.
    let paused = ChannelClock::frozen_at(
        0.0,
        1.0,
        FrozenClock {
            tau_old: 3.0,
            w_old: 5.0,
            frozen_at: 2.0,
        },
    );
    let resumed = reactivate_channel(&paused, 2.0, 1.0)?;
    println!(
        "resumed at rate 1: next firing at t = {}",
        resumed.next_firing()
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
