use thiserror::Error;

/// Errors shared by all subsystems of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two operators with incompatible dimensions were combined.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A matrix handed to a Hermitian container was not Hermitian.
    #[error("matrix is not Hermitian (max |M - M^dag| entry = {deviation:e})")]
    NotHermitian { deviation: f64 },

    /// A Fock-space operation would exceed the photon-number cutoff.
    #[error("photon cutoff too small: state needs {needed}, basis allows {allowed}")]
    CutoffTooSmall { needed: u32, allowed: u32 },

    /// A mode index was out of range, or a mode set was invalid.
    #[error("invalid mode selection: {0}")]
    InvalidMode(String),

    /// A configuration or protocol parameter failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
