use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or wiring violates its invariant. `field` names the offender.
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("index {index} out of bounds for {what} of size {len}")]
    OutOfBounds {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
