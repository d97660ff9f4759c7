//! Crate error type.

use thiserror::Error;

/// Errors surfaced by the library.
///
/// Soft numerical conditions (wide brackets, non-converged refinements) are
/// *not* errors: they travel as flags inside result types so that callers can
/// still inspect the partial output. `Error` is reserved for conditions where
/// no meaningful result exists.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation was handed parameters outside its domain.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An enumeration would exceed the configured word budget.
    #[error("word budget exceeded: {requested} words requested, budget {budget}")]
    BudgetExceeded { requested: u128, budget: u128 },

    /// The requested operation needs a parabolic fixed point the model lacks,
    /// or vice versa.
    #[error("{0}")]
    WrongRegime(String),

    /// A root finder could not bracket its root inside the search interval.
    #[error("root not bracketed in [{lo}, {hi}] for {what}")]
    RootNotBracketed { what: String, lo: f64, hi: f64 },

    /// Malformed map-configuration document.
    #[error("map config: {0}")]
    MapConfig(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
