use std::path::PathBuf;

use manifold_ar_core::Error as CoreError;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Numerical {
        context: &'static str,
        #[source]
        source: CoreError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("need at least 3 distinct x values, found {0}")]
    InsufficientData(usize),

    #[error("log-log fit needs positive values, found {0}")]
    NonPositive(f64),

    #[error("gradient audit failed: worst relative error {worst:e} exceeds {tolerance:e}")]
    GradientAudit { worst: f64, tolerance: f64 },

    #[error("estimator did not converge")]
    NotConverged,
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Self::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Process exit status: 1 for bad input, 2 for numerical failure, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Parse { .. } | Self::InsufficientData(_) | Self::NonPositive(_) => 1,
            Self::Numerical { source, .. } if is_input_error(source) => 1,
            Self::Numerical { .. } | Self::GradientAudit { .. } | Self::NotConverged => 2,
            Self::Io { .. } => 3,
        }
    }
}

/// Core errors that describe malformed input rather than a failed computation.
fn is_input_error(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::DimensionMismatch { .. }
            | CoreError::InvalidDimension(_)
            | CoreError::InvalidParameter(_)
            | CoreError::NotOrthonormal { .. }
            | CoreError::NotAntisymmetric { .. }
            | CoreError::NonFinite
            | CoreError::WrongManifold { .. }
            | CoreError::TrajectoryTooShort
    )
}

/// Attach a context label to core results.
pub(crate) trait Context<T> {
    fn context(self, what: &'static str) -> Result<T>;
}

impl<T> Context<T> for manifold_ar_core::Result<T> {
    fn context(self, what: &'static str) -> Result<T> {
        self.map_err(|source| HarnessError::Numerical { context: what, source })
    }
}
