use thiserror::Error;

use crate::geometry::Limb;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The central limb would have zero length (`x_m = z_m = 0`).
    #[error("degenerate pose: central limb length is zero")]
    DegeneratePose,

    #[error("unreachable pose: limb {limb} squared length {squared_length:e} m^2 is degenerate")]
    UnreachablePose { limb: Limb, squared_length: f64 },

    #[error("universal joint of limb {limb} is singular for this leg direction")]
    UJointSingular { limb: Limb },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian (condition number {condition:e})")]
    SingularJacobian { condition: f64 },

    #[error("reference unreachable at tick {tick} (t = {time:.3} s): {source}")]
    UnreachableReference {
        tick: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("log is empty")]
    EmptyLog,

    #[error("signal is constant or too short for phase estimation")]
    DegenerateSignal,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
