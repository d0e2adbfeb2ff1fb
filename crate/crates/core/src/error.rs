use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |A - A^H| = {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error(
        "Fock truncation too small: alpha^2 = {alpha_sq:.4} exceeds N/4 = {limit:.4} (N = {n_fock})"
    )]
    Truncation { alpha_sq: f64, limit: f64, n_fock: usize },

    #[error("cat frame (alpha = {frame_alpha}, N = {frame_n}) does not match parameters (alpha = {alpha}, N = {n_fock})")]
    FrameMismatch {
        frame_alpha: f64,
        frame_n: usize,
        alpha: f64,
        n_fock: usize,
    },

    #[error("time {t} outside [0, {t_end}]")]
    TimeOutOfRange { t: f64, t_end: f64 },

    #[error("integrator aborted at t = {time:.6} us (step {step}): {reason}; try dt <= {suggested_dt:.3e} us")]
    IntegratorAbort {
        step: usize,
        time: f64,
        reason: String,
        suggested_dt: f64,
    },

    #[error("state is not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),

    #[error("unidentifiable fit: {0}")]
    Unidentifiable(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no potential minimum: {0}")]
    NoMinimum(String),

    #[error("unknown parameter name `{0}`")]
    UnknownParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
