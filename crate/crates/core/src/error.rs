use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capacity exceeded: {what} is {got}, limit is {limit}")]
    Capacity {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("qubit index {index} out of range for {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("classical bit {index} out of range for {n_cbits} classical bits")]
    CbitOutOfRange { index: usize, n_cbits: usize },

    #[error("duplicate qubit index {0} in gate")]
    DuplicateQubit(usize),

    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("qubit count mismatch: {0} vs {1}")]
    QubitCountMismatch(usize, usize),

    #[error("sequence length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("length must be a power of two (pad via scan), got {0}")]
    NotPowerOfTwo(usize),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid nucleotide {ch:?} in record {record:?} at line {line}")]
    InvalidBase {
        record: String,
        line: usize,
        ch: char,
    },

    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("value out of range: {0}")]
    OutOfRange(String),
}
