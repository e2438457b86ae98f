use thiserror::Error;

/// Errors raised by chain construction, dense evaluation, integration and fitting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("resource limit: {what} needs {sites} sites, limit is {limit}")]
    Resource {
        what: String,
        sites: usize,
        limit: usize,
    },
    #[error("resource limit: {what} needs bond dimension {bond}, limit is {limit}")]
    BondLimit { what: String, bond: usize, limit: usize },
    #[error("computation failed: {0}")]
    Computation(String),
    #[error("fit rejected: {reason} (mu = {mu:.6e}, r2 = {r_squared:.6})")]
    FitRejected {
        reason: String,
        mu: f64,
        r_squared: f64,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn computation(msg: impl Into<String>) -> Self {
        Error::Computation(msg.into())
    }

    /// Prefix the message with context, keeping the variant.
    pub fn context(self, ctx: impl std::fmt::Display) -> Self {
        match self {
            Error::Input(m) => Error::Input(format!("{ctx}: {m}")),
            Error::Computation(m) => Error::Computation(format!("{ctx}: {m}")),
            Error::Resource { what, sites, limit } => Error::Resource {
                what: format!("{ctx}: {what}"),
                sites,
                limit,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
