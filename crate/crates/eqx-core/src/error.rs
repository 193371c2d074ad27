//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by instance construction, oracles, checkers, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A document failed to parse or violated the file schema.
    #[error("parse error: {0}")]
    Parse(String),

    /// An argument was malformed (bad index, bad epsilon, bad generator
    /// parameters).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A solver or checker precondition does not hold for the given instance.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The input broke a contract mid-run (e.g. a valuation claimed monotone
    /// produced a negative marginal).
    #[error("contract violated: {0}")]
    Contract(String),

    /// Integer arithmetic left the 64-bit range. Values are exact by
    /// construction, so overflow aborts instead of wrapping.
    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),

    /// An enumeration or step budget was exhausted before completion.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}

impl Error {
    /// The bare description, for wrapping into a longer message without
    /// stacking variant prefixes.
    pub fn detail(&self) -> String {
        match self {
            Error::Parse(s)
            | Error::InvalidInput(s)
            | Error::Precondition(s)
            | Error::Contract(s)
            | Error::BudgetExceeded(s) => s.clone(),
            Error::Overflow(s) => (*s).to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
