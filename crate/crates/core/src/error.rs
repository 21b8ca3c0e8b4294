use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("graph with {nodes} node(s) is not bisectable")]
    NotBisectable { nodes: usize },

    #[error("cascade {tweet_id} is unscorable: no classified retweeters")]
    Unscorable { tweet_id: String },

    #[error("coder sheets disagree on their tweet sets or feature lists: {0}")]
    SheetMismatch(String),

    #[error(
        "group lasso did not converge after {iterations} iterations \
         (kkt residual {kkt_residual:.3e}, relative change {relative_change:.3e})"
    )]
    NoConvergence {
        iterations: usize,
        kkt_residual: f64,
        relative_change: f64,
        last_beta: Vec<f64>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for input/configuration problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence { .. } | Error::Numerical(_) => 2,
            _ => 1,
        }
    }
}
