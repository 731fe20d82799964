use std::process::ExitCode;

use thiserror::Error;
use yamabe_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] CoreError),
    /// The verification report was written but did not pass.
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        let code = match self {
            Self::VerificationFailed(_) => 1,
            Self::Usage(_) | Self::Io { .. } => 2,
            Self::Core(e) => match e {
                CoreError::Config(_)
                | CoreError::Input(_)
                | CoreError::Dimension(_)
                | CoreError::InsufficientFiberData(_)
                | CoreError::NoSmoothClosing(_)
                | CoreError::BoundaryMargin { .. } => 2,
                CoreError::Degenerate(_)
                | CoreError::SingularSample(_)
                | CoreError::SingularWindow { .. }
                | CoreError::SingularState(_)
                | CoreError::StepUnderflow { .. }
                | CoreError::StepLimit(_) => 3,
            },
        };
        ExitCode::from(code)
    }
}
