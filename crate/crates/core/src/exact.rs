//! Exact path-wise simulation in operational time.
//!
//! Each channel `r` owns a unit-rate Poisson path and an internal clock
//! `T_r(t) = ∫₀ᵗ w_r(X_s) ds`. Between events every clock advances
//! linearly, and the next firing is the channel whose clock reaches its
//! next arrival first (modified next reaction method). Channels whose rate
//! drops to zero are frozen and later reactivated by rescaling the stored
//! firing time, so no random number is ever redrawn.

use crate::engine;
use crate::error::{Error, Result};
use crate::network::{ReactionNetwork, State, WeightVector};
use crate::paths::PoissonPath;

/// Firing time and rate recorded when a channel's rate vanished.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenClock {
    pub tau_old: f64,
    pub w_old: f64,
    pub frozen_at: f64,
}

/// Operational-time bookkeeping of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelClock {
    internal_time: f64,
    next_internal_arrival: f64,
    rate: f64,
    next_firing: f64,
    frozen: Option<FrozenClock>,
}

impl ChannelClock {
    /// A clock at internal time 0 that has not been given a rate yet.
    pub fn new(first_arrival: f64) -> Self {
        ChannelClock {
            internal_time: 0.0,
            next_internal_arrival: first_arrival,
            rate: 0.0,
            next_firing: f64::INFINITY,
            frozen: None,
        }
    }

    pub fn internal_time(&self) -> f64 {
        self.internal_time
    }

    pub fn next_internal_arrival(&self) -> f64 {
        self.next_internal_arrival
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// External time of the next firing, `∞` while the rate is zero.
    pub fn next_firing(&self) -> f64 {
        self.next_firing
    }

    pub fn frozen(&self) -> Option<&FrozenClock> {
        self.frozen.as_ref()
    }

    #[inline]
    pub(crate) fn advance(&mut self, dt: f64) {
        self.internal_time += self.rate * dt;
    }

    /// Switches the clock to rate `w_new` at external time `t`.
    #[inline]
    pub(crate) fn set_rate(&mut self, t: f64, w_new: f64) {
        if w_new > 0.0 {
            if w_new == self.rate {
                return;
            }
            if self.frozen.is_some() {
                *self = reactivate_channel(self, t, w_new).expect("clock is frozen");
                return;
            }
            self.next_firing = t + (self.next_internal_arrival - self.internal_time) / w_new;
        } else {
            if self.rate > 0.0 {
                self.frozen = Some(FrozenClock {
                    tau_old: self.next_firing,
                    w_old: self.rate,
                    frozen_at: t,
                });
            }
            self.next_firing = f64::INFINITY;
        }
        self.rate = w_new;
    }

    /// Consumes the pending arrival: the internal time lands on it exactly.
    #[inline]
    pub(crate) fn fire(&mut self, t: f64, next_arrival: f64) {
        self.internal_time = self.next_internal_arrival;
        self.next_internal_arrival = next_arrival;
        self.frozen = None;
        self.next_firing = if self.rate > 0.0 {
            t + (self.next_internal_arrival - self.internal_time) / self.rate
        } else {
            f64::INFINITY
        };
    }

    /// A clock frozen at `frozen_at` with pending firing time `tau_old`
    /// under rate `w_old`.
    pub fn frozen_at(internal_time: f64, next_internal_arrival: f64, frozen: FrozenClock) -> Self {
        ChannelClock {
            internal_time,
            next_internal_arrival,
            rate: 0.0,
            next_firing: f64::INFINITY,
            frozen: Some(frozen),
        }
    }
}

/// Reactivates a frozen clock with its first non-zero rate `w_new`:
/// `τ_new = t + (τ_old - t_frozen) w_old / w_new`.
///
/// The time spent frozen does not consume operational time, so the
/// remaining external time is measured from the moment the clock froze.
/// When the clock froze at `t_current` itself this is
/// `t_current + (τ_old - t_current) w_old / w_new`.
pub fn reactivate_channel(
    clock: &ChannelClock,
    t_current: f64,
    w_new: f64,
) -> Result<ChannelClock> {
    let frozen = clock.frozen.ok_or(Error::ClockNotFrozen)?;
    if !(w_new > 0.0 && w_new.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "reactivation rate must be positive, got {w_new}"
        )));
    }
    let next_firing = t_current + (frozen.tau_old - frozen.frozen_at) * frozen.w_old / w_new;
    Ok(ChannelClock {
        internal_time: clock.internal_time,
        next_internal_arrival: clock.next_internal_arrival,
        rate: w_new,
        next_firing,
        frozen: None,
    })
}

/// Stops a simulation the first time `‖x‖_l` exceeds `threshold`; the state
/// is held constant afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct StopRule {
    pub weights: WeightVector,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub max_events: u64,
    pub stop: Option<StopRule>,
}

impl SimOptions {
    pub const DEFAULT_MAX_EVENTS: u64 = 100_000_000;

    pub fn with_stop(mut self, rule: StopRule) -> Self {
        self.stop = Some(rule);
        self
    }

    pub fn with_max_events(mut self, max_events: u64) -> Self {
        self.max_events = max_events;
        self
    }
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            max_events: Self::DEFAULT_MAX_EVENTS,
            stop: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub channel: u32,
}

/// A simulated path: initial state plus the ordered reaction events.
///
/// Kernel switches are not recorded as events since they never change the
/// state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial_state: State,
    pub events: Vec<Event>,
    pub final_time: f64,
    pub final_state: State,
    /// Set when a [`StopRule`] fired.
    pub stopped_at: Option<f64>,
    pub switch_count: u64,
}

impl Trajectory {
    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    /// Right-continuous state at `t`: events at exactly `t` are included.
    pub fn state_at(&self, network: &ReactionNetwork, t: f64) -> Result<State> {
        if !(0.0..=self.final_time).contains(&t) {
            return Err(Error::TimeOutOfRange {
                time: t,
                final_time: self.final_time,
            });
        }
        let end = self.events.partition_point(|e| e.time <= t);
        let mut x = self.initial_state.clone().into_inner();
        for e in &self.events[..end] {
            network.fire_in_place(&mut x, e.channel as usize)?;
        }
        Ok(State::new(x))
    }

    /// States at each of the ascending times in `times`, in one pass.
    pub fn states_at(&self, network: &ReactionNetwork, times: &[f64]) -> Result<Vec<State>> {
        let mut out = Vec::with_capacity(times.len());
        let mut x = self.initial_state.clone().into_inner();
        let mut next = 0;
        let mut prev = f64::NEG_INFINITY;
        for &t in times {
            if !(0.0..=self.final_time).contains(&t) {
                return Err(Error::TimeOutOfRange {
                    time: t,
                    final_time: self.final_time,
                });
            }
            if t < prev {
                return Err(Error::InvalidArgument(
                    "query times must be ascending".into(),
                ));
            }
            prev = t;
            while next < self.events.len() && self.events[next].time <= t {
                network.fire_in_place(&mut x, self.events[next].channel as usize)?;
                next += 1;
            }
            out.push(State::new(x.clone()));
        }
        Ok(out)
    }

    /// Number of firings of each channel.
    pub fn firing_counts(&self, channels: usize) -> Vec<u64> {
        let mut counts = vec![0; channels];
        for e in &self.events {
            counts[e.channel as usize] += 1;
        }
        counts
    }

    /// Writes `time,channel,<species...>` rows, one per event, preceded by
    /// a row for the initial state with channel `-1`.
    pub fn write_csv(
        &self,
        network: &ReactionNetwork,
        out: &mut impl std::io::Write,
    ) -> Result<()> {
        let names: Vec<String> = (0..network.species_count())
            .map(|i| {
                network
                    .species_name(i)
                    .map_or_else(|| format!("x{i}"), str::to_owned)
            })
            .collect();
        writeln!(out, "time,channel,{}", names.join(","))?;
        let mut x = self.initial_state.clone().into_inner();
        let row = |x: &[u64]| x.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        writeln!(out, "0,-1,{}", row(&x))?;
        for e in &self.events {
            network.fire_in_place(&mut x, e.channel as usize)?;
            writeln!(out, "{},{},{}", e.time, e.channel, row(&x))?;
        }
        Ok(())
    }
}

/// Simulates `X_t = X_0 - Σ_r N_r Π_r(∫₀ᵗ w_r(X_{s-}) ds)` on `[0, t_end]`
/// driven by `paths` (one per channel).
pub fn simulate_exact(
    network: &ReactionNetwork,
    x0: &State,
    t_end: f64,
    paths: &mut [PoissonPath],
    options: &SimOptions,
) -> Result<Trajectory> {
    engine::run(network, x0, t_end, paths, options, None)
}
