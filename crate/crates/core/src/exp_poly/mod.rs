//! Matrices of exponential polynomials over an exact frequency lattice.

pub mod basis;
pub mod matrix;

pub use basis::{Reindex, SpectralBasis};
pub use matrix::{antiderivative_coefficients, ExpPolyMatrix, Term, PRUNE_TOL, RHO_TOL};
