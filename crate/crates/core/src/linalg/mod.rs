//! Dense complex matrix kernel.
//!
//! Every operator is stored as a complex matrix. A [`Field`] tag records
//! whether the matrix is constrained to the real field, in which case all
//! imaginary parts are exactly zero and decompositions run on the real
//! backend so that the outputs stay real.

mod decomp;
mod matrix;
mod random;
mod tolerance;

pub use decomp::{hermitian_eig, orthonormalize, svd, HermitianEig, Svd};
pub use matrix::{Field, Matrix, MatrixJson};
pub use random::{
    gaussian_matrix, haar_random_unitary, haar_unitary_from_rng, random_subspace, seeded_rng,
    subspace_from_rng, GwRng,
};
pub use tolerance::ToleranceConfig;
