use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("unknown external vertex id {0}")]
    UnknownVertex(u64),

    #[error("{metric} is undefined for {reason}")]
    UndefinedMetric {
        metric: &'static str,
        reason: &'static str,
    },

    #[error("graph is disconnected ({components} components); extract the largest connected component first")]
    Disconnected { components: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("propagation certificate violated: {0}")]
    CertificateViolation(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
