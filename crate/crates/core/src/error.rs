use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter failed validation; `field` names the offending input.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// The steady-state system is (numerically) singular, e.g. at the
    /// reciprocal excluded points.
    #[error("singular system (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },

    /// Every amplitude vanished, so populations cannot be normalized.
    #[error("zero excitation: all steady-state amplitudes vanish")]
    ZeroExcitation,

    /// Interface and edge index sets intersect.
    #[error("interface set {interface:?} overlaps edge set {edge:?}")]
    OverlappingSets { interface: Vec<usize>, edge: Vec<usize> },

    /// A closed form was evaluated outside its domain.
    #[error("outside closed-form domain: {0}")]
    Domain(String),

    /// A sweep exceeded its configured cell cap.
    #[error("sweep has {cells} cells, cap is {cap}")]
    CapExceeded { cells: usize, cap: usize },

    /// A cross-section value does not lie on a grid line.
    #[error("no grid line of {axis} within half a step of {value}")]
    NoGridLine { axis: String, value: f64 },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
