use thiserror::Error;

use crate::sdp::SdpSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("operation needs every party to share the same input count")]
    HeterogeneousScenario,

    #[error("terms {first} and {second} lie in one symmetry orbit but carry different weights")]
    InconsistentOrbit { first: String, second: String },

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),

    #[error("catalog entry `{name}` is not defined for K = {k}")]
    UnsupportedOutputs { name: String, k: usize },

    #[error("operation requires K = {expected}, got K = {actual}")]
    WrongOutputCount { expected: usize, actual: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("strategy count overflows: {0}")]
    Overflow(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("SDP did not converge after {iterations} iterations (gap {gap:e})", gap = best.gap)]
    SdpNotConverged {
        iterations: usize,
        best: Box<SdpSolution>,
    },

    #[error("restart {restart}: {source}")]
    Restart {
        restart: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
