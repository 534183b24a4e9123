// Shared event loop for the exact and split-step simulators.

use crate::error::{Error, Result};
use crate::exact::{ChannelClock, Event, SimOptions, Trajectory};
use crate::network::{ReactionNetwork, SplitPartition, State};
use crate::paths::PoissonPath;
use crate::splitstep::KernelSpec;

pub(crate) struct Modulation<'a> {
    pub partition: &'a SplitPartition,
    pub kernel: KernelSpec,
}

pub(crate) fn run(
    network: &ReactionNetwork,
    x0: &State,
    t_end: f64,
    paths: &mut [PoissonPath],
    options: &SimOptions,
    modulation: Option<Modulation<'_>>,
) -> Result<Trajectory> {
    let channels = network.channel_count();
    if x0.len() != network.species_count() {
        return Err(Error::DimensionMismatch {
            expected: network.species_count(),
            got: x0.len(),
        });
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be positive and finite, got {t_end}"
        )));
    }
    if paths.len() != channels {
        return Err(Error::PathCountMismatch {
            expected: channels,
            got: paths.len(),
        });
    }
    if let Some(m) = &modulation {
        if m.partition.channel_count() != channels {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} channels, network has {channels}",
                m.partition.channel_count()
            )));
        }
    }

    let mut x = x0.clone().into_inner();
    let mut fired = vec![0usize; channels];
    let mut clocks: Vec<ChannelClock> = paths
        .iter_mut()
        .map(|p| ChannelClock::new(p.arrival(1)))
        .collect();
    let mut events = Vec::new();
    let mut t = 0.0;

    // Kernel state: sigma = +1 means the first group runs at double rate.
    let mut sigma_positive = true;
    let mut switch_index = 1u64;
    let mut switch_count = 0u64;
    let next_switch = |k: u64| -> f64 {
        match &modulation {
            Some(m) => k as f64 * (m.kernel.h() / 2.0) - m.kernel.phase(),
            None => f64::INFINITY,
        }
    };
    let mut t_switch = next_switch(switch_index);

    let factor = |r: usize, sigma_positive: bool| -> f64 {
        match &modulation {
            None => 1.0,
            Some(m) => {
                if m.partition.is_first(r) == sigma_positive {
                    2.0
                } else {
                    0.0
                }
            }
        }
    };
    let update_rates = |clocks: &mut [ChannelClock], x: &[u64], t: f64, sigma_positive: bool| {
        for (r, clock) in clocks.iter_mut().enumerate() {
            let f = factor(r, sigma_positive);
            let w = if f == 0.0 {
                0.0
            } else {
                f * network.propensity(r, x)
            };
            clock.set_rate(t, w);
        }
    };

    let exceeds_stop = |x: &[u64]| {
        options
            .stop
            .as_ref()
            .is_some_and(|rule| rule.weights.dot(x) > rule.threshold)
    };

    let mut stopped_at = None;
    if exceeds_stop(&x) {
        stopped_at = Some(0.0);
    } else {
        update_rates(&mut clocks, &x, t, sigma_positive);
        loop {
            let mut next = 0usize;
            let mut tau = f64::INFINITY;
            for (r, clock) in clocks.iter().enumerate() {
                if clock.next_firing() < tau {
                    tau = clock.next_firing();
                    next = r;
                }
            }
            // Switches own their boundary instant: processed before any
            // reaction with the same timestamp.
            if t_switch <= tau && t_switch <= t_end {
                let dt = t_switch - t;
                for clock in clocks.iter_mut() {
                    clock.advance(dt);
                }
                t = t_switch;
                sigma_positive = !sigma_positive;
                switch_index += 1;
                switch_count += 1;
                t_switch = next_switch(switch_index);
                update_rates(&mut clocks, &x, t, sigma_positive);
                continue;
            }
            if tau > t_end {
                let dt = t_end - t;
                for clock in clocks.iter_mut() {
                    clock.advance(dt);
                }
                break;
            }
            if events.len() as u64 >= options.max_events {
                return Err(Error::EventBudgetExceeded {
                    budget: options.max_events,
                    time: tau,
                });
            }
            let dt = tau - t;
            for clock in clocks.iter_mut() {
                clock.advance(dt);
            }
            t = tau;
            network.fire_in_place(&mut x, next)?;
            fired[next] += 1;
            clocks[next].fire(t, paths[next].arrival(fired[next] + 1));
            events.push(Event {
                time: t,
                channel: next as u32,
            });
            if exceeds_stop(&x) {
                stopped_at = Some(t);
                break;
            }
            update_rates(&mut clocks, &x, t, sigma_positive);
        }
    }

    Ok(Trajectory {
        initial_state: x0.clone(),
        events,
        final_time: t_end,
        final_state: State::new(x),
        stopped_at,
        switch_count,
    })
}
