use alloc::string::String;

/// Errors raised by the library.
///
/// Numerical fallbacks that still produce a usable answer (a non-positive
/// tuning bound, a non-converging fixed point) are reported as warnings on
/// the result instead.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("need at least {needed} usable samples, found {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("risk curve is flat (range {range:e}); inefficiency is undefined")]
    FlatRiskCurve { range: f64 },

    #[error("invalid scenario: {0}")]
    Scenario(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
