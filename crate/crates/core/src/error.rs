use std::path::PathBuf;

/// Errors raised anywhere in the library.
///
/// Every variant maps onto one of the command-line exit codes through
/// [`Error::exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parameter {value} lies outside the reference interval [0, 1]")]
    Domain { value: f64 },

    #[error("{0}")]
    Validation(String),

    #[error("singular mapping on patch {patch} at xi = {point:?} (det = {det:e})")]
    SingularMapping { patch: usize, point: Vec<f64>, det: f64 },

    #[error("non-conforming interface: {0}")]
    Conformity(String),

    #[error("geometry mismatch: {0}")]
    Geometry(String),

    #[error("point {point:?} is not inside any patch")]
    Location { point: Vec<f64> },

    #[error("{0}")]
    Solver(String),

    #[error("{0}")]
    Usage(String),

    #[error("objective evaluation failed for design entry {index}: {source}")]
    Objective {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Short machine-readable category used on the CLI error stream.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Validation(_) => "validation",
            Error::SingularMapping { .. } => "singular-mapping",
            Error::Conformity(_) => "conformity",
            Error::Geometry(_) => "geometry",
            Error::Location { .. } => "location",
            Error::Solver(_) => "solver",
            Error::Usage(_) => "usage",
            Error::Objective { source, .. } => source.kind(),
            Error::Io { .. } => "io",
        }
    }

    /// Process exit code: 2 validation, 3 solver failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 4,
            Error::Solver(_) | Error::SingularMapping { .. } => 3,
            Error::Objective { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
