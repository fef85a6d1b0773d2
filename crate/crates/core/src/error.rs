use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {value} outside the domain of {what}")]
    OutOfDomain { what: &'static str, value: f64 },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("{what}: truncated integral did not converge (tail bound {tail_bound:e})")]
    Precision { what: &'static str, tail_bound: f64 },

    #[error("postcondition violated in {what}: {detail}")]
    Postcondition { what: &'static str, detail: String },

    #[error("grid mismatch: {0}")]
    Shape(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sample is empty")]
    EmptySample,

    #[error("{count} evaluation points fall outside the precomputed grid")]
    Extrapolation { count: usize },

    #[error("direct route {direct} and adjoint route {adjoint} disagree beyond tolerance")]
    Integrity { direct: f64, adjoint: f64 },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
