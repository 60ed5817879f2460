use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitianInput { deviation: f64 },
    #[error("matrix is not unitary (max |UU^dagger - I| = {deviation:.3e})")]
    NonUnitaryInput { deviation: f64 },
    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("could not separate the unitary spectrum from -1 after {attempts} phase rotations")]
    DegenerateSpectrum { attempts: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("support size {m} exceeds dimension {n}")]
    SupportTooLarge { m: usize, n: usize },
    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("need at least {needed} distinct sizes for a scaling fit, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    InvalidQubitIndex { index: usize, n_qubits: usize },
    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("{name} = {value} is out of range: {reason}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("exact adjacent-window mode is unavailable")]
    ModeUnavailable,
    #[error("system too large: {0}")]
    TooLarge(String),
    #[error("degenerate gamma: N*gamma = {n_gamma} is (numerically) an integer")]
    DegenerateGamma { n_gamma: f64 },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("no theory value is available for any observable in this record")]
    NoTheoryAvailable,
    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn out_of_range(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::OutOfRange { name, value, reason }
}
