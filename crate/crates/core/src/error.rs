use thiserror::Error;

pub type Result<T> = std::result::Result<T, HermiteError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HermiteError {
    #[error("invalid Hurst index {0}: must lie in the open interval (1/2, 1)")]
    InvalidHurst(f64),

    #[error("invalid Hermite order {0}: must be at least 1")]
    InvalidOrder(u32),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: value {value:e}, error estimate {error:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("singular volatility matrix at t = {t}")]
    SingularVolatility { t: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unstable configuration: {0}")]
    Unstable(String),

    #[error("internal numerical failure: {0}")]
    Numerical(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
}

impl HermiteError {
    /// True for errors caused by bad user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            HermiteError::InvalidHurst(_)
                | HermiteError::InvalidOrder(_)
                | HermiteError::DimensionMismatch { .. }
                | HermiteError::GridMismatch(_)
                | HermiteError::InvalidInput(_)
                | HermiteError::Config { .. }
        )
    }
}
