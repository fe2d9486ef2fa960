use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M^dag| = {max_asymmetry:.3e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigensolver(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("site {site} out of range for {n_qubits} qubits")]
    SiteOutOfRange { site: usize, n_qubits: usize },

    #[error("site {0} listed more than once")]
    DuplicateSite(usize),

    #[error("operator does not conserve excitation number (off-sector weight {0:.3e})")]
    NotNumberConserving(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parity violation: {0}")]
    Parity(String),

    #[error("propagation did not converge after {refinements} refinements (last change {achieved:.3e}, tolerance {tolerance:.1e})")]
    NotConverged { refinements: usize, achieved: f64, tolerance: f64 },

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("sample {sample} at {point} failed: {source}")]
    Sample {
        point: String,
        sample: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
