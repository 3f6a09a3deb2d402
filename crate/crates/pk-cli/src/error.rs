//! Error type shared by the CLI and harness, carrying the process exit
//! code: 1 for usage errors, 2 for data errors, 3 for internal failures.

use pk_core::{BinError, ClusterError, DataError, EncodeError, KernelError, MetricError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The invocation itself is wrong (bad flags or flag values).
    #[error("{0}")]
    Usage(String),
    /// The input data cannot be processed (unreadable, malformed, or
    /// violating a documented precondition).
    #[error("{0}")]
    Data(String),
    /// Something that should not happen given valid inputs.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<BinError> for CliError {
    fn from(e: BinError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EncodeError> for CliError {
    fn from(e: EncodeError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::NoConvergence => CliError::Internal(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        match e {
            ClusterError::ZeroRestarts => CliError::Usage(e.to_string()),
            ClusterError::NonFinite => CliError::Internal(e.to_string()),
            ClusterError::InvalidClusterCount { .. } => CliError::Data(e.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        CliError::Internal(e.to_string())
    }
}
