//! Error types shared across the crate.

use thiserror::Error;

use crate::solver::SubcriticalState;

#[derive(Debug, Error)]
pub enum QcurvError {
    #[error("invalid sphere parameters: need n > 2k with n >= 3, k >= 1, got n={n}, k={k}")]
    InvalidDimensions { n: u32, k: u32 },

    #[error("band limit too small: L={l_max}, need L >= 8")]
    BandLimitTooSmall { l_max: usize },

    #[error("quadrature node {index} failed to converge after {max_iter} Newton iterations")]
    NodeNonConvergence { index: usize, max_iter: usize },

    #[error("quadrature nodes are not strictly increasing (index {index})")]
    NodesOutOfOrder { index: usize },

    #[error("quadrature produced a non-positive weight at node {index}")]
    NonPositiveWeight { index: usize },

    #[error("radial quadrature did not converge to {tol:e} within {max_nodes} nodes")]
    RadialNonConvergence { tol: f64, max_nodes: usize },

    #[error("bubble concentration parameter must satisfy beta > 1, got {beta}")]
    InvalidBeta { beta: f64 },

    #[error("exponent q={q} outside the admissible range (2, {two_star}]")]
    InvalidExponent { q: f64, two_star: f64 },

    #[error("field is identically zero")]
    ZeroField,

    #[error("{context}: field must be positive at every node (min value {min_value:e})")]
    PositivityViolation { context: String, min_value: f64 },

    #[error("weight function failed the symmetry check: asymmetry {asymmetry:e} exceeds 1e-10")]
    AsymmetricWeight { asymmetry: f64 },

    #[error("positivity lost at q={q} after {iterations} iterations")]
    PositivityLost {
        q: f64,
        iterations: usize,
        partial: Box<SubcriticalState>,
    },

    #[error("no convergence at q={q} after {iterations} iterations (residual {residual:e})")]
    MaxIterations {
        q: f64,
        iterations: usize,
        residual: f64,
        partial: Box<SubcriticalState>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QcurvError>;
