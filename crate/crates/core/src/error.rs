use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("function `{name}` expects {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("division by zero")]
    DivisionByZero,

    #[error("unbound variable `{0}`")]
    Unbound(String),

    #[error("unbound function `{0}`")]
    UnboundFunction(String),

    #[error("value is not exactly representable: {0}")]
    Inexact(String),

    #[error("non-finite value during evaluation")]
    NonFinite,

    #[error("zero test undecidable: every sampled assignment hit a singularity")]
    Undecidable,

    #[error("expression is not polynomial in `{var}`")]
    NonPolynomial { var: String },

    #[error("invalid stencil: {0}")]
    InvalidStencil(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("singular Jacobian (|det| = {det:e})")]
    SingularJacobian { det: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("manifold restriction failed: {0}")]
    Manifold(String),

    #[error("unsupported order {order}: {reason}")]
    UnsupportedOrder { order: usize, reason: String },

    #[error("convergence probe failed: {0}")]
    Probe(String),

    #[error("{file}:{line}: {message}")]
    File {
        file: String,
        line: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
