//! Subspace geometry for equal-rank orthogonal projections.
//!
//! * [`angles`]: principal angles and the angle-equality test.
//! * [`projection`]: projections, subspaces and commuting decompositions.
//! * [`extension`]: the real-linear extension of a map on rank-`n`
//!   projections to all Hermitian matrices.
//! * [`reconstruction`]: recovery of the unitary or antiunitary that
//!   induces an angle-preserving map.
//! * [`maps`]: declarative generators for such maps.

pub mod angles;
pub mod error;
pub mod extension;
pub mod linalg;
pub mod maps;
pub mod projection;
pub mod reconstruction;

pub use angles::{principal_angles, PrincipalAngles};
pub use error::{GwError, Result};
pub use extension::RankNMap;
pub use linalg::{Field, Matrix, ToleranceConfig};
pub use projection::{Projection, Subspace};
pub use reconstruction::{ReconstructionConfig, ReconstructionResult};

