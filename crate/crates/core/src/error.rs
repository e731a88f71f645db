use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain: {0}")]
    Domain(String),

    /// A numerical fit did not converge. Carries the best objective value seen.
    #[error("estimation: {message} (best objective {best_objective})")]
    Estimation { message: String, best_objective: f64 },

    /// A caller broke an API precondition (length mismatch, wrong origin, ...).
    #[error("contract: {0}")]
    Contract(String),

    /// Invalid experiment or CLI configuration.
    #[error("config: {0}")]
    Config(String),

    /// Malformed input data.
    #[error("data: {0}")]
    Data(String),

    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn estimation(msg: impl Into<String>, best_objective: f64) -> Self {
        Error::Estimation {
            message: msg.into(),
            best_objective,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Estimation { .. } => "estimation",
            Error::Contract(_) => "contract",
            Error::Config(_) => "config",
            Error::Data(_) => "data",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
