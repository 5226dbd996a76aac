use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("bad config file: {0}")]
    Config(String),

    #[error("unknown {kind} {name:?}; known: {known}")]
    UnknownName { kind: &'static str, name: String, known: &'static str },

    #[error(transparent)]
    Core(#[from] sptkit::Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "cli.usage",
            CliError::Io { .. } => "cli.io",
            CliError::Config(_) => "cli.config",
            CliError::UnknownName { .. } => "cli.unknown_name",
            CliError::Core(e) => e.code(),
        }
    }

    /// 2 for usage and input errors, 1 for numerical or physics failures.
    pub fn exit_code(&self) -> i32 {
        use sptkit::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::InvalidArgument(_)
                | E::GroupValidation(_)
                | E::BadRepresentation(_)
                | E::CapExceeded { .. }
                | E::Precondition(_)
                | E::Parse(_) => 2,
                _ => 1,
            },
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
