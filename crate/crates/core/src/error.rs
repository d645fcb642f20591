use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type; variants map onto the failure modes of the
/// individual operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite {what}")]
    NonFinite { what: &'static str },

    #[error("coefficient overflow in sequence generation; smallest failing index k = {smallest_failing_k}")]
    Overflow { smallest_failing_k: u32 },

    #[error("realized degree {degree} exceeds the supported cap {cap}")]
    DegreeCap { degree: u64, cap: u64 },

    #[error("derivative of a degree-0 polynomial is not admitted")]
    ConstantDerivative,

    #[error("root solve did not converge ({context})")]
    Unconverged { context: String },

    #[error("backward-orbit sampling failed at chain step {step}")]
    BrolinStep { step: usize },

    #[error("unsupported domain operation: {0}")]
    UnsupportedDomain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
