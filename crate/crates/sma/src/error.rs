use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SmaError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("corruption error: {0}")]
    Corruption(String),
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] sma_core::Error),
}

pub type Result<T> = std::result::Result<T, SmaError>;

impl SmaError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> SmaError {
        let path = path.into();
        move |source| SmaError::Io { path, source }
    }

    /// Process exit code: 2 missing data, 3 configuration, 4 internal
    /// invariant violation, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            SmaError::MissingData(_) => 2,
            SmaError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
            SmaError::Config(_) => 3,
            SmaError::Core(sma_core::Error::Validation(_) | sma_core::Error::Shape(_)) => 4,
            SmaError::Core(sma_core::Error::Fold { source, .. })
                if matches!(**source, sma_core::Error::Validation(_) | sma_core::Error::Shape(_)) =>
            {
                4
            }
            _ => 1,
        }
    }

    /// Short machine-readable error class.
    pub fn kind(&self) -> &'static str {
        match self {
            SmaError::Io { .. } => "io",
            SmaError::MissingData(_) => "missing_data",
            SmaError::Format(_) => "format",
            SmaError::Corruption(_) => "corruption",
            SmaError::Version { .. } => "version",
            SmaError::Config(_) => "config",
            SmaError::Core(_) => "core",
        }
    }
}
