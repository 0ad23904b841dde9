use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode index {mode} out of range for a {modes}-mode space")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("beam-splitter modes must differ (got {0} twice)")]
    EqualModes(usize),

    #[error("invalid Fock space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("spaces are incompatible: {0}")]
    IncompatibleSpaces(String),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("rotation order N={0} must be an even positive integer")]
    OddOrder(usize),

    #[error("cutoff {cutoff} too small: need at least {required}")]
    InsufficientCutoff { cutoff: usize, required: usize },

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("negative noise strength {0}")]
    NegativeStrength(f64),

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("vectors are not orthonormal (defect {0:.3e})")]
    NotOrthonormal(f64),

    #[error("invalid mode set: {0}")]
    InvalidModeSet(String),

    #[error("operation needs a qubit code (d = 2), got d = {0}")]
    NotQubit(usize),

    #[error("physical dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("solver did not converge after {iterations} iterations (feasibility {feasibility:.3e}, gap {gap:.3e})")]
    NonConvergence {
        iterations: usize,
        feasibility: f64,
        gap: f64,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
