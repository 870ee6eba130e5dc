//! Isometric lower-triangular embeddings of metric solvable Lie algebras.

pub mod catalog;
pub mod curvature;
pub mod embed;
pub mod error;
pub mod io;
pub mod lie;
pub mod linalg;
pub mod triangular;
pub mod verify;

pub use curvature::{
    einstein_check, levi_civita, ricci, soliton_data, soliton_extension, soliton_extension_with, ConnectionTable,
    RicciData, Soliton,
};
pub use error::{Error, Result};
pub use lie::*;
pub use triangular::{einstein_ip, frobenius, is_lower, is_strictly_lower, MetricKind, TriangularMetric};
pub use embed::{embed, Embedding, EmbedOptions, Representation, Scale};
pub use verify::{certify, check_faithful, check_homomorphism, check_isometry, EmbeddingCertificate, Tolerances};
