use thiserror::Error;

use crate::grid::{Placement, Topology};

/// Broad class of a failure, used by front-ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: malformed parameters, wrong topology, missing models.
    Input,
    /// A hypothesis of the theory fails (non-elliptic coefficient, no contraction).
    Hypothesis,
    /// The numerics did not deliver (iteration caps, divergence).
    Numerical,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("coefficient is not uniformly elliptic: smallest eigenvalue {min_eigenvalue:e} <= 0")]
    NonElliptic { min_eigenvalue: f64 },

    #[error("Hoelder exponent must lie in (0, 1), got {0}")]
    InvalidExponent(f64),

    #[error("unknown coefficient family `{0}`")]
    UnknownFamily(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("placement mismatch: expected {expected:?}, got {got:?}")]
    PlacementMismatch { expected: Placement, got: Placement },

    #[error("operation requires {required:?} topology, grid is {actual:?}")]
    UnsupportedTopology {
        required: Topology,
        actual: Topology,
    },

    #[error("tangential boundary edge value {max_abs:e} exceeds PEC tolerance")]
    BoundaryViolation { max_abs: f64 },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("no convergence after {max_iter} iterations (relative residual {residual:e})")]
    NoConvergence { max_iter: usize, residual: f64 },

    #[error("invalid norm indices (s = {s}, p = {p}): {reason}")]
    InvalidIndices { s: f64, p: f64, reason: String },

    #[error("no contraction: M_sp * k0 = {product} >= 1")]
    NoContraction { product: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("model cannot supply values at (s0, p0): {}", format_points(.missing))]
    ModelMissing { missing: Vec<(f64, f64)> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn format_points(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|(s, p)| format!("({s}, {p})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NonElliptic { .. } | Error::NoContraction { .. } => ErrorClass::Hypothesis,
            Error::NoConvergence { .. } => ErrorClass::Numerical,
            _ => ErrorClass::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
