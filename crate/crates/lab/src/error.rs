use std::path::PathBuf;

use hardcore_core::bp::BpError;
use hardcore_core::estimators::EstimatorError;
use hardcore_core::oracle::OracleError;
use hardcore_core::{GraphError, ModelError};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bp(#[from] BpError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self::Usage(message.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for anything the caller can fix by changing the invocation or its
    /// inputs, 1 for a computation that ran and failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Bp(BpError::NotConverged { .. }) => 1,
            Self::Estimator(
                EstimatorError::MixingNotReached { .. }
                | EstimatorError::DegenerateFactor { .. }
                | EstimatorError::Bp(BpError::NotConverged { .. }),
            ) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
