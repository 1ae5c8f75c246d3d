use std::fmt;

pub const EXIT_OK: i32 = 0;
/// The command ran but a verification check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID_FLAGS: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid flags: {0}")]
    Flags(String),
    #[error("cannot parse {source_name}: {reason}")]
    Parse { source_name: String, reason: String },
    #[error("solver failed: {0}")]
    Solver(graphtv::Error),
    #[error("{path}: {error}")]
    Io { path: String, error: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Flags(_) => EXIT_INVALID_FLAGS,
            CliError::Parse { .. } => EXIT_PARSE,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub(crate) fn parse(source_name: &str, reason: impl fmt::Display) -> Self {
        CliError::Parse {
            source_name: source_name.to_string(),
            reason: reason.to_string(),
        }
    }
}

/// Parameter errors from the library are flag errors; everything else
/// raised while solving is a solver failure.
impl From<graphtv::Error> for CliError {
    fn from(e: graphtv::Error) -> Self {
        match e {
            graphtv::Error::InvalidParameter { .. } => CliError::Flags(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}
