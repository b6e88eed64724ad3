use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("duplicate name: {0}")]
    DuplicateName(String),
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("{0} is not a qubit")]
    NotAQubit(String),
    #[error("{0} is not a mode")]
    NotAMode(String),
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("matrix dimension {got} does not match local dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("invalid permutation")]
    InvalidPermutation,
    #[error("mixture weights sum to {0}, expected 1")]
    WeightMismatch(f64),
    #[error("mixture components do not share a layout")]
    LayoutMismatch,
    #[error("basis vector does not match layout: {0}")]
    BadBasis(String),
}
