use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid algebra data: {0}")]
    InvalidAlgebra(String),

    #[error("Jacobi identity violated (residual {residual:.3e})")]
    JacobiViolation { residual: f64 },

    #[error("algebra is not solvable: derived series stabilises at dimension {stable_dim}")]
    NotSolvable { stable_dim: usize },

    #[error("ad of the abelian part is not symmetric (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error("ad of the abelian part does not commute on the nilradical (residual {residual:.3e})")]
    NotCommuting { residual: f64 },

    #[error("subspace is not invariant: {0}")]
    NotInvariant(String),

    #[error("no element of the abelian part acts with positive weights on the nilradical")]
    NoPositiveDerivation,

    #[error("grading is incompatible with the bracket (residual {residual:.3e})")]
    GradingIncompatible { residual: f64 },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("representation is not faithful (margin {margin:.3e})")]
    NotFaithful { margin: f64 },

    #[error("conjugating matrix does not respect the block structure: {0}")]
    NotBlockRespecting(String),

    #[error("form is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("scale {requested} is too small{}", match .min_feasible {
        Some(m) => format!(" (minimum feasible {m:.6e})"),
        None => " (no feasible scale found)".to_string(),
    })]
    ScaleTooSmall {
        requested: f64,
        min_feasible: Option<f64>,
    },

    #[error("structural conditions failed: {}", .0.join("; "))]
    ConditionsFailed(Vec<String>),

    #[error("matrix for basis vector {index} is not lower triangular")]
    NotLowerTriangular { index: usize },

    #[error("matrices have different sizes")]
    SizeMismatch,

    #[error("representations have different sources ({left} vs {right})")]
    SourceMismatch { left: usize, right: usize },

    #[error("not a nilsoliton (residual {residual:.3e})")]
    NotSoliton { residual: f64 },

    #[error("soliton constant is not determined: the identity is a derivation")]
    Ambiguous,

    #[error("extension could not be made Einstein (residual {residual:.3e})")]
    ExtensionNotEinstein { residual: f64 },

    #[error("map is not a derivation (residual {residual:.3e})")]
    NotDerivation { residual: f64 },

    #[error("derivation has a non-positive eigenvalue {eigenvalue:.3e}")]
    NotPositive { eigenvalue: f64 },

    #[error("unknown catalog entry `{0}`")]
    UnknownExample(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("io error: {0}")]
    Io(String),
}
