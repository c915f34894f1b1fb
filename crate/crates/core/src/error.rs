use thiserror::Error;

/// Errors raised by the simulation kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameters within {distance:.3e} rad/us of the exceptional point (|delta| <= {tolerance:e})")]
    ExceptionalPoint { distance: f64, tolerance: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mixing-angle logarithm is singular at these parameters")]
    LogSingularity,

    #[error("mixing angle on the boundary alpha_i = 0 (Hermitian limit only)")]
    MixingAngleBoundary,

    #[error("step size underflow at t = {t}: |h| = {h:e}")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integration exceeded {0} steps")]
    MaxStepsExceeded(usize),

    #[error("non-finite value encountered during integration at t = {0}")]
    NonFinite(f64),

    #[error("time {t} outside schedule span [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("survival probability {0:e} too small for postselection")]
    VanishingSurvival(f64),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("empty trajectory record")]
    EmptyRecord,
}

/// Coarse classification used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Physics-domain refusal (EP proximity, unusable postselection).
    Domain,
    /// Integrator or arithmetic failure.
    Numerical,
    /// Caller supplied an invalid value.
    Input,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::ExceptionalPoint { .. }
            | Error::LogSingularity
            | Error::MixingAngleBoundary
            | Error::VanishingSurvival(_)
            | Error::ZeroNorm => ErrorKind::Domain,
            Error::StepSizeUnderflow { .. } | Error::MaxStepsExceeded(_) | Error::NonFinite(_) => {
                ErrorKind::Numerical
            }
            Error::InvalidParameter(_)
            | Error::InvalidArgument(_)
            | Error::TimeOutOfRange { .. }
            | Error::EmptyRecord => ErrorKind::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
