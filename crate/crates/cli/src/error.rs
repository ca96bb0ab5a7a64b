use std::path::PathBuf;

use choquet_probit_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const NOT_CONVERGED: i32 = 2;
    pub const DATA: i32 = 3;
    pub const CONFIG: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config error in {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },
    #[error("data error: {0}")]
    Data(String),
    #[error("data error in {path}, line {line}: {message}")]
    DataAt { path: String, line: u64, message: String },
    #[error(transparent)]
    Model(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ConfigParse { .. } => exit::CONFIG,
            CliError::Data(_) | CliError::DataAt { .. } => exit::DATA,
            CliError::Model(e) => match e {
                CoreError::UnknownColumn(_) | CoreError::InvalidData(_) => exit::DATA,
                CoreError::InvalidSpec(_) | CoreError::InvalidCapacity(_) | CoreError::InvalidMembership(_) => {
                    exit::CONFIG
                }
                _ => exit::OTHER,
            },
            CliError::Io { .. } | CliError::Json { .. } => exit::OTHER,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
