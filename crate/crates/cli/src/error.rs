use std::path::PathBuf;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for invalid parameters, I/O and other failures.
pub const EXIT_INVALID: i32 = 1;
/// Exit status when the asymptotic bound beyond the search radius exceeds
/// the search maximum.
pub const EXIT_INCONCLUSIVE: i32 = 2;
/// Exit status when `table` output deviates from the embedded published values.
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] nsconst::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Serialize(String),
    #[error("{0} value(s) differ from the published table")]
    Mismatch(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(nsconst::Error::InconclusiveSearchRadius { .. }) => EXIT_INCONCLUSIVE,
            CliError::Mismatch(_) => EXIT_MISMATCH,
            _ => EXIT_INVALID,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Serialize(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Serialize(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
