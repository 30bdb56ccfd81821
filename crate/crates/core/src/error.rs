use thiserror::Error;

/// Errors raised while building grids, sampling profiles or evaluating fields.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("grid needs at least {min} cells, got {got}")]
    GridTooCoarse { got: usize, min: usize },

    #[error("invalid material parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("non-positive initial density {value} at interior node {node} (x = {x})")]
    DegenerateDensity { node: usize, x: f64, value: f64 },

    #[error("mesh tangled: cell {cell} has r_x = {r_x:e}")]
    MeshTangled { cell: usize, r_x: f64 },

    #[error("field length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{0} has not been derived yet")]
    MissingDerivedField(&'static str),

    #[error("invalid step configuration: {0}")]
    InvalidStepConfig(String),

    #[error("linear system lost diagonal dominance at row {row}")]
    NotDiagonallyDominant { row: usize },

    #[error("zero pivot in tridiagonal solve at row {row}")]
    ZeroPivot { row: usize },

    #[error("output failed: {0}")]
    Output(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
