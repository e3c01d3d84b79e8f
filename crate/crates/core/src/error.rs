use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, LpaError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("truncation degree {degree} too small (residual {residual:.3e}); try degree >= {suggested}")]
    Truncation {
        degree: usize,
        residual: f64,
        suggested: usize,
    },

    #[error("no convergence after {iterations} iterations (gap {gap:.3e})")]
    Convergence {
        iterations: usize,
        gap: f64,
        best: Vec<Complex64>,
    },

    #[error("numerical instability: {0}")]
    Instability(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular configuration: {0}")]
    Singular(String),
}

impl LpaError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            LpaError::InvalidArgument(_) => "invalid-argument",
            LpaError::Degenerate(_) => "degenerate-input",
            LpaError::Truncation { .. } => "truncation",
            LpaError::Convergence { .. } => "convergence",
            LpaError::Instability(_) => "numerical-instability",
            LpaError::Precondition(_) => "precondition",
            LpaError::Singular(_) => "singular-configuration",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LpaError::InvalidArgument(msg.into())
    }
}
