use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series did not converge within {terms} terms (z = {z})")]
    NonConvergence { z: f64, terms: usize },

    #[error("adaptive quadrature exceeded {panels} panels (error estimate {error:.3e})")]
    QuadratureFailure { panels: usize, error: f64 },

    #[error("SOE budget exceeded: {n_exp} exponentials needed, best certified error {best:.3e}")]
    BudgetExceeded { n_exp: usize, best: f64 },

    #[error("mesh must have at least 2 cells per side, got {0}")]
    InvalidSize(usize),

    #[error("linear solve failed after {iterations} iterations (relative residual {residual:.3e})")]
    SolveFailure { iterations: usize, residual: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
