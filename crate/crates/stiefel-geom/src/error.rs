use thiserror::Error;

/// Errors raised by the matrix kernels and manifold operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is numerically rank deficient")]
    RankDeficient,

    #[error("input is not special orthogonal: {0}")]
    NotSpecialOrthogonal(String),

    #[error("eigenvalue within {0:.1e} of -1; principal logarithm is not defined")]
    LogBranchBoundary(f64),

    #[error("no tangent construction achieves rank {rank} on St({n},{p})")]
    UnreachableRank { n: usize, p: usize, rank: usize },

    #[error("St({n},{p}) is too small for this construction (need p >= 2, n >= p+2)")]
    DimensionTooSmall { n: usize, p: usize },

    #[error("plane is numerically degenerate (wedge norm {0:.3e} below threshold)")]
    DegeneratePlane(f64),

    #[error("log map did not converge within {max_iter} iterations (residual {residual:.3e})")]
    NoConvergence { max_iter: usize, residual: f64 },

    #[error("no sign change found while bracketing a root in ({0}, {1})")]
    NoSignChange(f64, f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
