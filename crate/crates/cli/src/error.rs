use std::path::{Path, PathBuf};

use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing input: {}", .0.display())]
    MissingInput(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] tivc_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 config, 3 numeric, 4 missing inputs, 1 anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::MissingInput(_) => 4,
            CliError::Io { .. } => 1,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(
                tivc_core::Error::Config(_)
                | tivc_core::Error::InvalidArgument(_)
                | tivc_core::Error::TaskDefinition(_),
            ) => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::MissingInput("a".into()).exit_code(), 4);
        let numeric = tivc_core::Error::Training {
            epoch: 0,
            demo: 0,
            source: Box::new(tivc_core::Error::NumericDomain {
                what: "cost",
                index: None,
            }),
        };
        assert_eq!(CliError::Core(numeric).exit_code(), 3);
        assert_eq!(CliError::Core(tivc_core::Error::Config("k".into())).exit_code(), 2);
    }
}
