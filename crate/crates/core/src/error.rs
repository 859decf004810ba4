use std::fmt;

use thiserror::Error;

use crate::batch::LabelId;

pub type Result<T, E = DriftError> = std::result::Result<T, E>;

/// Which reduction ran out of rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankScope {
    Batch,
    Label(LabelId),
    /// A standalone PCA fit.
    Pca,
}

impl fmt::Display for RankScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankScope::Batch => f.write_str("batch"),
            RankScope::Label(l) => write!(f, "label {l}"),
            RankScope::Pca => f.write_str("pca"),
        }
    }
}

#[derive(Debug, Error)]
pub enum DriftError {
    #[error("insufficient samples: need at least {required}, got {got}")]
    InsufficientSamples { required: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("rank shortfall ({scope}): {count} samples/rank available, {required} required")]
    Rank {
        scope: RankScope,
        count: usize,
        required: usize,
    },

    #[error("matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("reference covariance is singular even after jitter")]
    SingularCovariance,

    #[error("label {0} has no samples")]
    EmptyLabel(LabelId),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("monitor log is empty, nothing to render")]
    NothingToRender,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("invalid cluster count: {0}")]
    InvalidK(String),

    #[error("invalid drift schedule: {0}")]
    InvalidSchedule(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("corrupt file: {0}")]
    CorruptFile(String),

    #[error("unsupported format version {found} (this build reads version {expected})")]
    Version { found: u32, expected: u32 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl DriftError {
    /// Process exit status used by the command-line front end. Usage errors
    /// are reported by the argument parser with status 2.
    pub fn exit_code(&self) -> u8 {
        match self {
            DriftError::InsufficientSamples { .. } => 10,
            DriftError::InvalidInput(_) => 11,
            DriftError::Dimension { .. } => 12,
            DriftError::Rank { .. } => 13,
            DriftError::NotPsd { .. } => 14,
            DriftError::SingularCovariance => 15,
            DriftError::EmptyLabel(_) => 16,
            DriftError::InsufficientData(_) => 17,
            DriftError::NothingToRender => 18,
            DriftError::DegenerateData(_) => 19,
            DriftError::InvalidK(_) => 20,
            DriftError::InvalidSchedule(_) => 21,
            DriftError::UndefinedCorrelation(_) => 22,
            DriftError::Format(_) => 23,
            DriftError::CorruptFile(_) => 24,
            DriftError::Version { .. } => 25,
            DriftError::Io(_) => 26,
        }
    }
}
