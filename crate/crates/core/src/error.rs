use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A precondition on the numeric parameters was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A function was evaluated outside of its domain.
    #[error("domain violation: {0}")]
    Domain(String),

    /// The requested computation would exceed the configured memory budget.
    #[error("resource budget exceeded: {0}")]
    ResourceExhausted(String),

    /// An enclosure could not be tightened to the requested width.
    #[error("enclosure width {achieved:e} exceeds the requested {requested:e} ({what})")]
    EnclosureNotReached {
        what: String,
        achieved: f64,
        requested: f64,
    },

    /// The asymptotic bound beyond the search radius is not dominated by the
    /// maximum found inside it.
    #[error(
        "inconclusive search radius {search_radius}: asymptotic bound {asymptotic_bound} \
         exceeds the search maximum {search_max}; raise the search radius or the cutoff"
    )]
    InconclusiveSearchRadius {
        search_radius: f64,
        asymptotic_bound: f64,
        search_max: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
