use std::path::PathBuf;

use thiserror::Error;

use crate::basis::ModeIndex;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum CrError {
    #[error("invalid mode (n={n}, m={m}): need |m| <= n and n + m even")]
    InvalidMode { n: i64, m: i64 },

    #[error("raising operator would create mode {mode:?} above target cutoff {cutoff}")]
    CutoffExceeded { mode: ModeIndex, cutoff: u32 },

    #[error("quadrature did not converge for {quad:?}: doubling nodes changed value by {change:e}")]
    QuadratureNonconvergence { quad: [ModeIndex; 4], change: f64 },

    #[error("projected table size {projected} exceeds cap {cap}")]
    ResourceCap { projected: usize, cap: usize },

    #[error("table mismatch: {0}")]
    TableMismatch(String),

    #[error("malformed table file: {0}")]
    MalformedFile(String),

    #[error("unsupported table version `{0}` (expected v1)")]
    VersionMismatch(String),

    #[error("checksum mismatch: header says {expected}, body hashes to {actual}")]
    ChecksumMismatch { expected: String, actual: String },

    #[error("step size underflow at t={t}: tolerance {tol:e} unreachable")]
    StepUnderflow { t: f64, tol: f64 },

    #[error("non-finite state at t={t}; last good sample at t={last_good_t}")]
    NonFinite { t: f64, last_good_t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular chart: {0}")]
    Singularity(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("search stopped after {iterations} iterations with residual {residual:e}")]
    NotStationary {
        iterations: usize,
        residual: f64,
        best: Box<crate::subspaces::StationaryWave>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, CrError>;

impl CrError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CrError::Io { path: path.into(), source }
    }
}
