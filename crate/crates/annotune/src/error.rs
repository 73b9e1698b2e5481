use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] annotune_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Malformed input file; `line` is 1-based.
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), line, message: message.into() }
    }

    /// Process exit status for this error.
    ///
    /// 2 bad input or usage, 3 runner failure, 4 every stage-two candidate
    /// invalid, 5 not enough valid training data, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use annotune_core::Error as E;
        match self {
            Error::Core(E::Runner(_)) => 3,
            Error::Core(E::AllCandidatesInvalid(_)) => 4,
            Error::Core(E::InsufficientData { .. } | E::EmptyTrainingSet) => 5,
            Error::Core(E::Divergence { .. }) => 1,
            Error::Core(_) | Error::Parse { .. } | Error::Json { .. } | Error::Usage(_) => 2,
            Error::Io { .. } => 2,
        }
    }
}
