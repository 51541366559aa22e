use std::path::Path;

use symcache_core::Error as CoreError;

/// Everything the front end can fail with. Each variant maps to one exit
/// status and one reason code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// A verification or decode check did not hold.
    #[error("{0}")]
    Check(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Io { .. } => "io",
            Self::Check(_) => "check_failed",
            Self::Core(e) => match e {
                CoreError::Infeasible(_) => "infeasible",
                CoreError::Domain(_) => "domain",
                CoreError::OutOfRange { .. } => "out_of_range",
                CoreError::Overflow(_) => "overflow",
                CoreError::Usage(_) => "usage",
                CoreError::Consistency(_) => "consistency",
                CoreError::InsufficientRange { .. } => "insufficient_range",
            },
        }
    }

    /// 1 for failed checks, 2 for bad invocations.
    pub fn exit_status(&self) -> i32 {
        match self {
            Self::Check(_) | Self::Core(CoreError::Consistency(_) | CoreError::InsufficientRange { .. }) => 1,
            _ => 2,
        }
    }

    /// The single stderr line: `error code=<code> reason=<text>`.
    pub fn line(&self) -> String {
        let reason = self.to_string().replace(['\n', '\r'], " ");
        format!("error code={} reason={reason}", self.code())
    }
}
