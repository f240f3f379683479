use thiserror::Error;

/// Errors raised by the solvers, quadratures and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Frank constants: {0}")]
    InvalidConstants(String),

    #[error("invalid director state: |u| = {norm} is not within {tol:e} of 1")]
    InvalidState { norm: f64, tol: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("quadrature error: {0}")]
    Quadrature(String),

    #[error("integrability error: {0}")]
    Integrability(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("field is not O(2)-equivariant: max |u . e_phi| = {max_c:e} exceeds {tol:e}")]
    NotEquivariant { max_c: f64, tol: f64 },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NoConvergence {
        iterations: usize,
        gradient_norm: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
