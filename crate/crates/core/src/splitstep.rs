//! Split-step simulation through the square-wave kernel
//! `σ_h(t) = 1 - 2(⌊t/(h/2)⌋ mod 2)`.
//!
//! Channels of the first group run at intensity `(1 + σ_h) w_r` and those
//! of the second at `(1 - σ_h) w_r`, so on every half-interval of length
//! `h/2` one group is switched off while the other runs at twice its rate.
//! The switches are deterministic events that change no state, only
//! slopes of the operational clocks. Shifting the kernel by `h/4` gives
//! the Strang split through the very same code path.

use crate::engine::{self, Modulation};
use crate::error::{Error, Result};
use crate::exact::{SimOptions, Trajectory};
use crate::network::{ReactionNetwork, SplitPartition, State};
use crate::paths::PoissonPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitMethod {
    Lie,
    Strang,
}

impl std::str::FromStr for SplitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lie" | "lie-trotter" => Ok(SplitMethod::Lie),
            "strang" => Ok(SplitMethod::Strang),
            other => Err(Error::InvalidArgument(format!(
                "unknown split method {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for SplitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitMethod::Lie => "lie",
            SplitMethod::Strang => "strang",
        })
    }
}

/// Split-step length `h` and kernel phase. The kernel in effect at time
/// `t` is `σ_h(t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    h: f64,
    phase: f64,
}

impl KernelSpec {
    /// Any phase in `[0, h/2)`.
    pub fn new(h: f64, phase: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "h must be positive and finite, got {h}"
            )));
        }
        if !(0.0..h / 2.0).contains(&phase) {
            return Err(Error::InvalidKernel(format!(
                "phase must lie in [0, h/2), got {phase}"
            )));
        }
        Ok(KernelSpec { h, phase })
    }

    pub fn lie(h: f64) -> Result<Self> {
        KernelSpec::new(h, 0.0)
    }

    pub fn strang(h: f64) -> Result<Self> {
        KernelSpec::new(h, h / 4.0)
    }

    pub fn for_method(method: SplitMethod, h: f64) -> Result<Self> {
        match method {
            SplitMethod::Lie => KernelSpec::lie(h),
            SplitMethod::Strang => KernelSpec::strang(h),
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn method(&self) -> Option<SplitMethod> {
        if self.phase == 0.0 {
            Some(SplitMethod::Lie)
        } else if self.phase == self.h / 4.0 {
            Some(SplitMethod::Strang)
        } else {
            None
        }
    }

    /// Whether `t` is a multiple of `h`, up to rounding.
    pub fn is_on_grid(&self, t: f64) -> bool {
        let n = (t / self.h).round();
        (t - n * self.h).abs() <= 1e-9 * self.h.max(t.abs())
    }
}

/// `σ_h(t + phase) ∈ {+1, -1}`, right-continuous.
pub fn kernel_value(spec: &KernelSpec, t: f64) -> f64 {
    let k = ((t + spec.phase) / (spec.h / 2.0)).floor();
    if k.rem_euclid(2.0) == 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Integral of the unshifted kernel over `[0, s]`: a triangle wave with
/// values in `[0, h/2]`, zero at multiples of `h`.
fn unshifted_integral(h: f64, s: f64) -> f64 {
    let u = s.rem_euclid(h);
    if u < h / 2.0 {
        u
    } else {
        h - u
    }
}

/// `Σ_h(t) = ∫₀ᵗ σ_h(s + phase) ds` in closed form; `|Σ_h| <= h/2`.
pub fn kernel_integral(spec: &KernelSpec, t: f64) -> f64 {
    unshifted_integral(spec.h, t + spec.phase) - unshifted_integral(spec.h, spec.phase)
}

/// The deterministic switch instants of a kernel inside `[0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSchedule {
    pub switch_times: Vec<f64>,
}

impl SplitSchedule {
    pub fn new(spec: &KernelSpec, t_end: f64) -> Self {
        let half = spec.h / 2.0;
        let switch_times = (1u64..)
            .map(|k| k as f64 * half - spec.phase)
            .take_while(|&s| s <= t_end)
            .collect();
        SplitSchedule { switch_times }
    }
}

/// Simulates the split process on `[0, t_end]`:
///
/// `Y_t = Y_0 - Σ_{r∈R₁} N_r Π_r(∫(1+σ_h) w_r(Y_{s-}) ds) - Σ_{r∈R₂} N_r Π_r(∫(1-σ_h) w_r(Y_{s-}) ds)`.
///
/// Passing the same `paths` as [`simulate_exact`](crate::exact::simulate_exact)
/// couples the two trajectories.
pub fn simulate_split(
    network: &ReactionNetwork,
    partition: &SplitPartition,
    spec: &KernelSpec,
    x0: &State,
    t_end: f64,
    paths: &mut [PoissonPath],
    options: &SimOptions,
) -> Result<Trajectory> {
    engine::run(
        network,
        x0,
        t_end,
        paths,
        options,
        Some(Modulation {
            partition,
            kernel: *spec,
        }),
    )
}
