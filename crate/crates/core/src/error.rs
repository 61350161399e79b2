use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("gate acts twice on qubit {0}")]
    RepeatedQubit(usize),

    #[error("matrix is not unitary (max |U†U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("invalid subsystem: {0}")]
    InvalidSubsystem(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("corrupted density matrix: {0}")]
    CorruptedDensity(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("refusing run: estimated memory {estimated_bytes} bytes exceeds the bound of {bound_bytes} bytes")]
    MemoryBound { estimated_bytes: u128, bound_bytes: u128 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed dump file: {0}")]
    MalformedDump(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
