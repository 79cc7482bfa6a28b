use thiserror::Error;

/// Everything that can go wrong when setting up or running a walk experiment.
///
/// Variants are grouped by how a caller should react: bad parameter values,
/// states that violate the lattice constraints, and requests that exceed the
/// exact-enumeration caps.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is not a probability (must lie in [0, 1])")]
    ProbabilityRange { name: &'static str, value: f64 },

    #[error("step value {0} is not a unit step (+1 or -1)")]
    InvalidStep(i8),

    #[error("position x = {x} is unreachable after {n} steps (need |x| <= n and x = n mod 2)")]
    OffLattice { x: i64, n: u64 },

    #[error("invalid history: {0}")]
    InvalidHistory(String),

    #[error(
        "history is empty; the first step is drawn from the start rule, not the memory kernel"
    )]
    EmptyHistory,

    #[error("operation requires at least one completed step (n >= 1)")]
    NotStarted,

    #[error("marginal sampling is only valid under the uniform memory kernel")]
    MarginalNeedsUniform,

    #[error("step count must be at least 1")]
    ZeroSteps,

    #[error("trial count must be at least 1")]
    ZeroTrials,

    #[error("{what}: requested {requested} exceeds the exact-enumeration cap of {max}")]
    EnumerationCap {
        what: &'static str,
        requested: u64,
        max: u64,
    },

    #[error("{what} is not defined at parameter value {value}")]
    ParamRegime { what: &'static str, value: f64 },

    #[error("hitting-time experiment must start away from zero")]
    StartAtZero,

    #[error("horizons must be a strictly increasing, non-empty sequence")]
    HorizonsNotIncreasing,

    #[error("horizon {horizon} does not lie past the start time {start_time}")]
    HorizonBeforeStart { horizon: u64, start_time: u64 },

    #[error("replica count {m} is too small (need M >= 2)")]
    ReplicaCount { m: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
