//! Error type shared by every core module.

use alloc::string::String;
use core::fmt;

/// Errors raised by the state model, frame chain, and reconstruction engines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Wavefunction or pattern-function order above the supported cap.
    UnsupportedOrder { order: usize, max: usize },
    /// A scalar argument outside its mathematical domain.
    Domain { what: &'static str, value: f64 },
    /// An acquisition spec that cannot be realized (pulse windows out of
    /// bounds, overlapping, no baseline samples, ...).
    Spec(String),
    /// Vacuum calibration impossible (non-positive dark-area variance or
    /// too few dark pulses).
    Calibration(&'static str),
    /// Histogram construction from an empty sample list.
    EmptyHistogram,
    /// Too few bins on the positive axis for a stable inversion.
    InsufficientResolution { bins: usize, required: usize },
    /// Iterative fit failed to converge.
    FitDiverged { iterations: usize },
    /// Fit converged to a parameter incompatible with the model.
    ModelMismatch { eta: f64 },
    /// A quadrature sample outside the tabulated grid.
    DataRange { value: f64 },
    /// Wigner sections evaluated on different grids cannot be compared.
    GridMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnsupportedOrder { order, max } => {
                write!(f, "order {order} not supported (maximum {max})")
            }
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::Spec(reason) => write!(f, "invalid acquisition spec: {reason}"),
            Error::Calibration(reason) => write!(f, "calibration failed: {reason}"),
            Error::EmptyHistogram => write!(f, "cannot build a histogram from no samples"),
            Error::InsufficientResolution { bins, required } => {
                write!(f, "only {bins} bins on the positive axis, need at least {required}")
            }
            Error::FitDiverged { iterations } => {
                write!(f, "fit did not converge within {iterations} iterations")
            }
            Error::ModelMismatch { eta } => {
                write!(f, "fitted efficiency {eta} incompatible with the loss model")
            }
            Error::DataRange { value } => {
                write!(f, "quadrature value {value} outside the tabulated range")
            }
            Error::GridMismatch => write!(f, "sections are tabulated on different grids"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
