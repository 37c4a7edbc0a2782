use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("operation `{op}` does not support the `{variant}` variant")]
    UnsupportedVariant {
        op: &'static str,
        variant: &'static str,
    },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("step size underflow at t = {t}, x = {x}, y = {y}")]
    StepUnderflow { t: f64, x: f64, y: f64 },
    #[error("trajectory diverged at t = {t}, x = {x}, y = {y}")]
    Divergence { t: f64, x: f64, y: f64 },
    #[error("maximum number of integration steps exceeded at t = {t}")]
    MaxSteps { t: f64 },
    #[error("precondition failed ({hypothesis}): {detail}")]
    Precondition {
        hypothesis: &'static str,
        detail: String,
    },
    #[error("retries exhausted: {0}")]
    RetriesExhausted(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn precondition(hypothesis: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition {
            hypothesis,
            detail: detail.into(),
        }
    }

    /// True for failures of the numerical machinery (as opposed to bad input
    /// or unmet hypotheses).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow { .. }
                | Error::Divergence { .. }
                | Error::MaxSteps { .. }
                | Error::RetriesExhausted(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
