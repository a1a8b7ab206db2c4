use thiserror::Error;

pub type Result<T> = std::result::Result<T, GwError>;

#[derive(Debug, Error)]
pub enum GwError {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NonHermitian { defect: f64 },

    #[error("{0} did not converge")]
    ConvergenceFailure(&'static str),

    #[error("columns are numerically rank deficient (column {column} residual {residual:.3e})")]
    RankDeficient { column: usize, residual: f64 },

    #[error("bad rank: {0}")]
    BadRank(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rank mismatch: left has rank {left}, right has rank {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("not a projection: {0}")]
    NotAProjection(String),

    #[error("projections do not commute (commutator {commutator:.3e}, idempotency defect {defect:.3e})")]
    NotCommuting { commutator: f64, defect: f64 },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("vector is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("spectrum of {what} leaves [0, 1] by {excursion:.3e}")]
    SpectrumExcursion { what: &'static str, excursion: f64 },

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("invalid matrix data: {0}")]
    InvalidMatrix(String),

    #[error("invalid map spec: {0}")]
    InvalidMapSpec(String),

    #[error("table map has no entry for the given input")]
    UnknownInput,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GwError {
    /// Numerical failures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            GwError::ConvergenceFailure(_)
                | GwError::InternalInconsistency(_)
                | GwError::SpectrumExcursion { .. }
        )
    }
}
