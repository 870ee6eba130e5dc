//! Metric Lie algebras, the `𝔞 ⊕ 𝔫` split and gradings of the nilradical.

pub mod algebra;
pub mod grading;
pub mod split;
pub mod weights;

pub use algebra::{
    completely_solvable, derivation_residual, derived_series, jacobi_residual, lower_central_series, validate_algebra,
    BracketTerm, MetricLieAlgebra, ValidationReport,
};
pub use grading::{compatibility_residual, grade_nilpotent, grading, grading_from_weights, quotient, Grading, Quotient};
pub use split::{validate_split, ConditionCheck, ConditionsReport, SolvableSplit};
pub use weights::{positive_derivation, weight_decomposition, WeightDecomposition, WeightSpace};
