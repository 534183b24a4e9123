//! Path-wise simulation of stochastic chemical kinetics in operational time.
//!
//! A reaction network is simulated through its random time change
//! representation: each channel consumes its own unit-rate Poisson path at
//! the speed given by its propensity. Running the exact simulator and the
//! split-step simulator on the same paths couples them, which makes the
//! mean-square (strong) error of operator splitting directly measurable.
//!
//! * [`network`]: states, stoichiometry, propensities, split partitions.
//! * [`paths`]: reproducible per-channel Poisson paths.
//! * [`exact`]: exact simulation (modified next reaction method).
//! * [`splitstep`]: Lie and Strang split-step simulation.
//! * [`spatial`]: flattening of reaction-diffusion models.
//! * [`stats`]: coupled ensembles, strong/weak errors, order fits.
//! * [`model`]: JSON model files.
//! * [`experiments`]: the shipped benchmark models and their studies.

pub mod error;
pub mod exact;
pub mod experiments;
pub mod model;
pub mod network;
pub mod paths;
pub mod spatial;
pub mod splitstep;
pub mod stats;

mod engine;

pub use error::{Error, Result};
pub use exact::{
    reactivate_channel, simulate_exact, ChannelClock, Event, SimOptions, StopRule, Trajectory,
};
pub use model::{builtin, load_model, Model, ModelFile};
pub use network::{
    fit_assumption_constants, weighted_norm, AssumptionReport, Channel, Propensity,
    ReactionNetwork, SplitPartition, State, WeightVector,
};
pub use paths::{PoissonPath, StreamSeedPlan};
pub use splitstep::{
    kernel_integral, kernel_value, simulate_split, KernelSpec, SplitMethod, SplitSchedule,
};
pub use stats::{
    strong_error, weak_error, CoupledEnsemble, CoupledSetup, ErrorEstimate, ErrorNorm, Observable,
};
