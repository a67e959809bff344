use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid parameters or incompatible discretization sizes.
    #[error("configuration error: {0}")]
    Config(String),

    /// A solver produced a non-finite state.
    #[error("blow-up detected at t = {t}: {what}")]
    BlowUp { t: f64, what: String },

    /// Quantities that must be representable overflowed `f64`.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Root bracketing or fixed-point verification failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An iterative expansion did not reach its tolerance.
    #[error("series did not converge after {terms} terms")]
    NotConverged { terms: usize },

    /// A control needs to act on a mode the noise does not excite.
    #[error("mode {mode} is not controllable (zero noise eigenvalue)")]
    Uncontrollable { mode: i64 },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Fills in the time of a blow-up raised without one.
    pub(crate) fn at_time(self, time: f64) -> Self {
        match self {
            Error::BlowUp { t, what } if t.is_nan() => Error::BlowUp { t: time, what },
            e => e,
        }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Rejects non-positive or non-finite parameters.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be positive and finite, got {value}")))
    }
}
