use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("vector norm {norm:e} is below the degeneracy threshold")]
    ZeroVector { norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("trajectory has no velocity data")]
    MissingVelocities,

    #[error("trajectory left the disk at t = {time} (|z| = {radius})")]
    EscapedDisk { time: f64, radius: f64 },

    #[error("time {time} is not on the integration grid of {steps_per_unit} steps per unit time")]
    OffGrid { time: f64, steps_per_unit: usize },

    #[error("time discontinuity at phase {phase} does not fall on an even grid node")]
    MisalignedBreakpoint { phase: f64 },

    #[error("trajectories came within {separation:e} of each other at t = {time}")]
    SeparationUnderflow { time: f64, separation: f64 },

    #[error("angle refinement exceeded {levels} bisection levels at t = {time}")]
    SubstepLimit { time: f64, levels: u32 },

    #[error("{what}: cross-check disagreement {gap:e} exceeds tolerance {tolerance:e}")]
    CrossCheckFailed {
        what: &'static str,
        gap: f64,
        tolerance: f64,
    },

    #[error("non-transversal intersection at t = {time} (angle rate {rate:e})")]
    TransversalityFailure { time: f64, rate: f64 },

    #[error("orbit does not close: return distance {distance:e} after {period} iterates")]
    NotPeriodic { distance: f64, period: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
