use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = QadError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum QadError {
    #[error("line {line}: malformed coefficient `{text}`")]
    BadCoefficient { line: usize, text: String },

    #[error("line {line}: invalid Pauli letter `{letter}` (expected one of I, X, Y, Z)")]
    BadPauliLetter { line: usize, letter: char },

    #[error("line {line}: expected `<coefficient> <letters>`, got `{text}`")]
    MalformedLine { line: usize, text: String },

    #[error("line {line}: string has {found} qubits, earlier terms have {expected}")]
    InconsistentLength {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: header declares {declared} qubits but terms have {found}")]
    HeaderMismatch {
        line: usize,
        declared: usize,
        found: usize,
    },

    #[error("empty input: no terms and no `# qubits:` header")]
    EmptyInput,

    #[error("coefficient {0} is not finite")]
    NonFiniteCoefficient(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit count {0} outside supported range 1..={max}", max = crate::simulator::MAX_QUBITS)]
    QubitRange(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("parameter {index} = {value} leaves the trust region |theta| < {bound}")]
    TrustRegion {
        index: usize,
        value: f64,
        bound: f64,
    },

    #[error("regularised metric is not positive definite (smallest eigenvalue {smallest:e})")]
    NotPositiveDefinite { smallest: f64 },

    #[error("energy query failed at shift {shift:?}: {source}")]
    Query {
        shift: Vec<f64>,
        #[source]
        source: Box<QadError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
