use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("at most 64 qubits supported, got {0}")]
    TooManyQubits(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("unsupported parameter: {0}")]
    Unsupported(String),
    #[error("invalid flag pair ({s},{e}) for weight {w}")]
    FlagPair { s: usize, e: usize, w: usize },
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("fault set is not distinguishable")]
    NotDistinguishable(Box<crate::faults::Counterexample>),
    #[error("lookup table file: {0}")]
    LutFile(String),
    #[error("no crossing of the reference line in the sweep")]
    NoCrossing,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
