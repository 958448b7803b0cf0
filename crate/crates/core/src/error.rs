use thiserror::Error;

/// Errors shared across the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// Mismatched sample spaces or vector lengths between arguments.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid problem context: {0}")]
    Context(String),

    #[error("enumeration budget exceeded: {required} tests required, budget is {budget}")]
    Budget { required: u128, budget: u128 },

    #[error("unsupported test class: {0}")]
    UnsupportedClass(String),

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("certification failure: {0}")]
    Certification(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
