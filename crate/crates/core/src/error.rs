use thiserror::Error;

use crate::timestepper::SolverState;

/// Errors raised by the spectral toolkit, the dynamics and the integrators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("lattice mismatch: K={left_k}/M={left_m} vs K={right_k}/M={right_m}")]
    LatticeMismatch {
        left_k: usize,
        left_m: usize,
        right_k: usize,
        right_m: usize,
    },

    #[error("system linear_fixed_u requires a prescribed velocity")]
    MissingPrescribedVelocity,

    #[error("prescribed velocity not available at t={t} (covers [{start}, {end}])")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("misaligned sample times: {0} vs {1}")]
    MisalignedTimes(f64, f64),

    /// The march produced a non-finite state or crossed the H^1 ceiling. The last finite
    /// state is kept so callers can report where the trajectory left every bounded set.
    #[error("blow-up detected at t={time:.6e} ({reason})")]
    BlowUp {
        time: f64,
        reason: String,
        last_state: Box<SolverState>,
    },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
