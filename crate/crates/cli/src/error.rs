use thiserror::Error;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Analysis(#[from] cldmap_core::Error),

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cldmap_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Analysis(e) => match e {
                E::Config(_) => 2,
                E::Input { .. } | E::Format(_) | E::Dimension { .. } => 3,
                E::Degenerate(_) => 4,
                E::ShapeMismatch { .. } | E::OutOfBounds { .. } => 1,
            },
            CliError::Output { .. } | CliError::Internal(_) => 1,
        }
    }
}
