use std::path::PathBuf;

/// Errors raised by the disaggregation toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate cluster: {0}")]
    DegenerateCluster(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the failure is numerical rather than caused by bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_) | Error::Solver(_) | Error::DegenerateCluster(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
