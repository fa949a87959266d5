//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SgeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("neighbor graph is disconnected ({} components, sizes {component_sizes:?}); \
             increase delta or restrict to the largest component",
            component_sizes.len())]
    DisconnectedGraph { component_sizes: Vec<usize> },

    #[error("no path between nodes {from} and {to}; their components have sizes {} and {}",
            from_component.len(), to_component.len())]
    NoPath {
        from: usize,
        to: usize,
        from_component: Vec<usize>,
        to_component: Vec<usize>,
    },

    #[error("insufficient points: {m} points cannot support a degree-{degree} spline fit")]
    InsufficientPoints { m: usize, degree: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, SgeError>;

impl SgeError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        SgeError::Io {
            path: path.into(),
            source,
        }
    }
}
