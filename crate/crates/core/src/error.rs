use thiserror::Error;

/// Errors raised by the geometry, dynamics and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Input that cannot describe a valid object (NaN, zero vector, wrong shape).
    #[error("malformed input in `{field}`: {message}")]
    MalformedInput { field: String, message: String },

    /// A numeric parameter outside its admissible range.
    #[error("invalid parameter `{name}`: {message}")]
    Parameter { name: String, message: String },

    /// A matrix with vanishing determinant.
    #[error("degenerate matrix: determinant {0:e} is zero")]
    Degenerate(f64),

    /// A generator whose trace is not zero, so exp(tA) leaves SL(2,C).
    #[error("generator trace {trace} is not zero: det(exp(tA)) = e^(t tr A) != 1")]
    TraceNotZero { trace: String },

    /// The operation's precondition does not hold for this input.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The algebraic and dynamical verdicts disagree.
    #[error("internal inconsistency: {0}")]
    BasisDisagreement(Box<crate::equibaire::Disagreement>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn malformed(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::MalformedInput {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parameter(name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
