//! Dense complex matrix kernels.

pub mod bernoulli;
pub mod dexp;
pub mod eig;
pub mod expm;
pub mod homological;
pub mod matrix;
pub mod norms;
pub mod schur;

pub use bernoulli::BernoulliTable;
pub use dexp::dexp_apply;
pub use eig::{eig, hermitian_eig, EigDecomposition};
pub use expm::{expm, expm_skew_hermitian};
pub use homological::{homological_operator, homological_solve, homological_solve_with, Diophantine};
pub use matrix::{pauli, ComplexMatrix};
pub use norms::{frobenius_norm, spectral_norm, unitarity_defect};
pub use schur::{schur, Schur};
