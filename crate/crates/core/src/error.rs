use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("geometry error in element {element}: {message}")]
    ElementGeometry { element: usize, message: String },

    #[error("constraint error: {0}")]
    Constraint(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("benchmark error: {0}")]
    Benchmark(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn geometry(message: impl Into<String>) -> Self {
        Error::Geometry(message.into())
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// Attaches an element index to a bare geometry error.
    pub(crate) fn in_element(self, element: usize) -> Self {
        match self {
            Error::Geometry(message) => Error::ElementGeometry { element, message },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
