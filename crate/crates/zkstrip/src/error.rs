//! Error type shared by every module of the crate.

use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong while building grids, stepping the
/// solver or running a verification experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A grid or weight parameter violates its precondition.
    InvalidDimension(&'static str),
    /// Exponential weight table would overflow (`k * L > 700`).
    WeightOverflow { k: f64, l: f64 },
    /// A functional that needs a nonzero field got the zero field.
    ZeroField,
    /// Banded or dense factorization hit a zero pivot.
    SingularMatrix,
    /// A modal coefficient left the trusted range during time stepping.
    BlowUp { t: f64 },
    /// Decay-rate fit got a series it cannot fit.
    DegenerateSeries(&'static str),
    /// An experiment precondition (smallness/decay gate) failed.
    GateFailed(&'static str),
    /// Observed decay rate fell below the guaranteed fraction of the
    /// theoretical one.
    RateBelowBound { fitted: f64, required: f64 },
    /// Any other violated precondition.
    InvalidParameter(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDimension(what) => write!(f, "invalid dimension: {what}"),
            Error::WeightOverflow { k, l } => {
                write!(f, "exponential weight overflow: k*L = {} > 700", k * l)
            }
            Error::ZeroField => write!(f, "field is identically zero"),
            Error::SingularMatrix => write!(f, "singular matrix in linear solve"),
            Error::BlowUp { t } => write!(f, "solution blew up at t = {t}"),
            Error::DegenerateSeries(why) => write!(f, "degenerate series: {why}"),
            Error::GateFailed(gate) => write!(f, "precondition gate failed: {gate}"),
            Error::RateBelowBound { fitted, required } => write!(
                f,
                "fitted decay rate {fitted} below required bound {required}"
            ),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for Error {}
