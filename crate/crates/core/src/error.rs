use std::path::PathBuf;

/// Errors raised by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid landmark set: {0}")]
    InvalidLandmark(String),

    #[error("inconsistent data: {0}")]
    InconsistentData(String),

    #[error("insufficient sample density at grid point {index}: {detail}")]
    InsufficientDensity { index: usize, detail: String },

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("unreliable check: {unresolved} of {total} jets unresolved")]
    UnreliableCheck { unresolved: usize, total: usize },

    #[error("leading {j}x{j} minor is singular at the base point; try another permutation")]
    NeedsPermutation { j: usize },

    #[error("inverse iteration failed for every radius above {epsilon_min}")]
    StraighteningFailed { epsilon_min: f64 },

    #[error("cube too coarse: {outside} of {total} grid points lie outside the stratum (limit {limit:.3e} fraction)")]
    CubeTooCoarse {
        outside: usize,
        total: usize,
        limit: f64,
    },

    #[error("vector is not horizontal at the base point (residual {residual:.3e})")]
    NotHorizontal { residual: f64 },

    #[error("no horizontal path found (best endpoint residual {residual:.3e})")]
    NoPathFound { residual: f64 },

    #[error("degenerate vector field system: {0}")]
    DegenerateSystem(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("bad configuration: {0}")]
    Config(String),

    #[error("report `{0}` has no metrics")]
    EmptyReport(String),

    #[error("cannot write to {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::ContractViolation(msg.into())
}
