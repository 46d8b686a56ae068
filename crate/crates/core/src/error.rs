use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input; `line` is 1-based and counts the header.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unit index {index} out of range for population of {len}")]
    IndexOutOfRange { index: usize, len: usize },

    /// Conditioning on survival at an age where the distribution has already reached 1.
    #[error("degenerate conditioning at age {age}: distribution value is 1")]
    DegenerateConditioning { age: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
