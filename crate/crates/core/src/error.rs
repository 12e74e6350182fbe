use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{what}: requested {requested} exceeds limit {limit}")]
    Resource {
        what: String,
        requested: u128,
        limit: u128,
    },

    #[error("{context}: no convergence (last two estimates {previous:e} and {last:e})")]
    Accuracy {
        context: String,
        previous: f64,
        last: f64,
    },

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}

impl Error {
    /// Prefixes the message with the scale at which the failure happened.
    pub fn at_epsilon(self, eps: f64) -> Error {
        let tag = |s: String| format!("epsilon {eps}: {s}");
        match self {
            Error::Validation(s) => Error::Validation(tag(s)),
            Error::Resource { what, requested, limit } => Error::Resource { what: tag(what), requested, limit },
            Error::Accuracy { context, previous, last } => Error::Accuracy { context: tag(context), previous, last },
            Error::Divergence(s) => Error::Divergence(tag(s)),
            other => other,
        }
    }
}
