//! Construction of isometric lower-triangular embeddings.

pub mod basis;
pub mod extend;
pub mod pipeline;
pub mod representation;
pub mod stages;

pub use basis::{adapted_ad, adjoint_rep, ordered_basis, OrderedBasis, WeightSlot};
pub use extend::{extend_abelian, rank_one_extension, two_step_derivation};
pub use pipeline::{embed, Embedding, EmbedOptions, Scale};
pub use representation::{conjugate, direct_sum, spd_lower_factor, Block, Representation};
pub use stages::{equalize, scale_automorphism, special_rep, ScalePlan, StageMode, StageSolution, StageSystem};
