//! Positivity analysis for the `tau_{n,k}` family of linear maps on
//! Hermitian matrices and their subtraction-optimised variants.

pub mod bloch_scan;
pub mod circulant;
pub mod conditions;
pub mod error;
pub mod lemma;
pub mod linalg;
pub mod map_kernel;
pub mod positivity;
pub mod simplex;

pub use error::{Error, Result};
pub use linalg::{CMatrix, HermitianMatrix};
pub use map_kernel::MapSpec;
