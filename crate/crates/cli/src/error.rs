use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}{}: {message}", path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "config".into()), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Config {
        path: Option<PathBuf>,
        line: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Numeric(#[from] qtn_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical and i/o failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 2,
            Self::Numeric(e) if e.is_input() => 2,
            Self::Numeric(_) | Self::Io { .. } => 3,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::Config {
            path: None,
            line: None,
            message: message.into(),
        }
    }
}
