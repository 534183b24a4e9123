use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("channel index {index} out of range (network has {count} channels)")]
    ChannelOutOfRange { index: usize, count: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("firing channel {channel} would make species {species} negative")]
    InfeasibleFiring { channel: usize, species: usize },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid split partition: {0}")]
    InvalidPartition(String),

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("lattice scan would visit more than {budget} states")]
    ScanBudgetExceeded { budget: u64 },

    #[error("stream id out of range: trajectory {trajectory} (< {max_trajectories}), channel {channel} (< {max_channels})")]
    StreamOutOfRange {
        trajectory: u64,
        channel: u64,
        max_trajectories: u64,
        max_channels: u64,
    },

    #[error("event budget of {budget} exceeded at t = {time}")]
    EventBudgetExceeded { budget: u64, time: f64 },

    #[error("expected one Poisson path per channel ({expected}), got {got}")]
    PathCountMismatch { expected: usize, got: usize },

    #[error("time {time} outside trajectory range [0, {final_time}]")]
    TimeOutOfRange { time: f64, final_time: f64 },

    #[error("channel clock is not frozen")]
    ClockNotFrozen,

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{failures} of {samples} coupled samples failed; first failure: {first}")]
    EnsembleFailed {
        failures: usize,
        samples: usize,
        first: Box<Error>,
    },

    #[error("need at least 2 usable rows to fit an order, got {0}")]
    TooFewRows(usize),

    #[error("model file: {0}")]
    Model(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
