//! Error type shared across the crate.
//!
//! Validation errors name the violated model assumption so a caller can tell
//! a bad configuration apart from a numerical failure at runtime. The CLI
//! maps the two classes to distinct exit codes.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Baseline intensities must be strictly positive.
    #[error("baseline intensity must be positive: xi[{index}] = {value}")]
    NonpositiveBaseline { index: usize, value: f64 },

    /// Excitation weights must be nonnegative.
    #[error("excitation weight must be nonnegative: c[{row}][{col}] = {value}")]
    NegativeExcitation { row: usize, col: usize, value: f64 },

    /// The exponential kernel decay rate must be strictly positive.
    #[error("kernel decay rate must be positive: alpha = {0}")]
    NonpositiveDecay(f64),

    /// Stationarity requires the branching matrix spectral radius below one.
    #[error("branching matrix must be subcritical: spectral radius {rho} >= 1")]
    SupercriticalBranching { rho: f64 },

    /// Parameter vectors and matrices must agree on the component count.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// A numeric input failed a positivity or finiteness requirement.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Event times must be strictly increasing, inside (0, horizon], and
    /// no two components may share a time.
    #[error("invalid event log: {0}")]
    InvalidEventLog(String),

    /// Initial intensities may not undershoot the baseline.
    #[error("initial intensity below baseline: lambda0[{index}] = {value} < xi = {baseline}")]
    InitialIntensityBelowBaseline {
        index: usize,
        value: f64,
        baseline: f64,
    },

    /// Evaluation time outside the observation window.
    #[error("time {t} outside the observation window [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    /// The simulated path left the admissible region.
    #[error("path explosion: |X| exceeded {bound} at t = {time}")]
    Explosion { time: f64, bound: f64 },

    /// Regression requires at least one sample inside the estimation interval.
    #[error("no regression samples fall inside the estimation interval")]
    EmptyFit,

    /// An iterative numerical routine failed to converge.
    #[error("numerical routine failed: {0}")]
    Numerical(String),

    /// Too many consecutive exploded replicates; the cell is unusable.
    #[error("persistent explosion: {attempts} consecutive rejected paths for one replicate")]
    PersistentExplosion { attempts: usize },

    #[error("unknown model name: {0}")]
    UnknownModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    /// A text artifact (CSV) that could not be parsed back.
    #[error("malformed file {path}: {reason}")]
    MalformedFile { path: String, reason: String },
}

impl Error {
    /// Exit code contract: 2 for validation and input errors, 3 for
    /// numerical failures discovered mid-run.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Explosion { .. } | Error::Numerical(_) | Error::PersistentExplosion { .. } => 3,
            _ => 2,
        }
    }
}
