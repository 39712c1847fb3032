use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid code distance {0}: must be an odd integer")]
    InvalidDistance(i64),
    #[error("distance {d} is not supported here: {reason}")]
    UnsupportedDistance { d: u32, reason: &'static str },
    #[error("line {line}: {message} (at `{token}`)")]
    Parse {
        line: usize,
        token: String,
        message: String,
    },
    #[error("circuit validation failed: {0}")]
    Validation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("detector {0} is not deterministic in the noiseless circuit")]
    NonDeterministicDetector(usize),
    #[error("dense simulation needs {needed} amplitude qubits, limit is {limit}")]
    TooManyQubits { needed: usize, limit: usize },
    #[error("{what}: {count} exceeds the limit of {limit}")]
    TooLarge {
        what: &'static str,
        count: usize,
        limit: usize,
    },
    #[error("cannot decompose error mechanism at {location} with detectors {detectors:?} into graphlike parts")]
    Undecomposable { location: String, detectors: Vec<usize> },
    #[error("detector {0} is not a node of the matching graph")]
    DefectNotInGraph(usize),
    #[error("no perfect matching exists for the given syndrome")]
    NoMatching,
    #[error("no accepted shots for basis {0}")]
    NoAcceptedShots(char),
    #[error("underdetermined fit: {0}")]
    Underdetermined(String),
    #[error("density matrix is not physical: Bloch vector norm {0}")]
    NonPhysical(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
