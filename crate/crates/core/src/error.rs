use thiserror::Error;

/// Errors raised by the linear algebra, state and measurement layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix is not Hermitian (max |A - A^dag| entry {0:e})")]
    NotHermitian(f64),

    #[error("negative eigenvalue {0:e} below clamp tolerance")]
    NegativeEigenvalue(f64),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("columns are not orthonormal (max |V^dag V - I| entry {0:e})")]
    ColumnsNotOrthonormal(f64),

    #[error("entry buffer has {found} elements, expected {expected}")]
    BadShape { expected: usize, found: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("Jacobi eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("rank {rank} must satisfy 1 <= rank <= {dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("outcome index {index} out of range (instrument has {outcomes} outcomes)")]
    BadOutcomeIndex { index: usize, outcomes: usize },

    #[error("outcome {outcome} has probability {probability:e}, below the conditioning floor")]
    OutcomeProbabilityTooSmall { outcome: usize, probability: f64 },

    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid indirect model: {0}")]
    InvalidModel(String),

    #[error("value {value} outside [{low}, {high}]")]
    OutOfRange { value: f64, low: f64, high: f64 },

    #[error("evolution entangles system and apparatus; use the general (mixed-state) check")]
    EntanglingEvolution,

    #[error("instrument is uninformative: every effect is proportional to the identity")]
    UninformativeInstrument,

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
