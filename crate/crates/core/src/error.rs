//! Error type shared by every kernel in the crate.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands have incompatible matrix dimensions.
    DimensionMismatch { expected: usize, found: usize },
    /// Spectral bases with different diophantine parameters cannot be merged.
    DiophantineMismatch,
    /// The declared base frequencies satisfy a low-order integer relation `(k, omega) = 0`.
    ResonantBasis { k: Vec<i32> },
    /// A frequency was zero, negative where not allowed, or not finite.
    InvalidFrequency(f64),
    /// The limiting mean (or a quasi-periodic solve) met a term with `t^m`, `m > 0`, or `Re mu != 0`.
    SecularTerm { k: Vec<i32>, rho: f64, power: u32 },
    /// Small divisor `|lambda_l - lambda_m - i (k, omega)|` below the diophantine threshold.
    Resonance {
        left: usize,
        right: usize,
        k: Vec<i32>,
        divisor: f64,
        threshold: f64,
    },
    /// Quantum averaging existence condition fails for an eigenbasis entry of a mode.
    ExistenceCondition { left: usize, right: usize, k: Vec<i32> },
    NonDiagonalizable,
    IllConditionedEigenbasis { condition: f64 },
    /// An iterative kernel did not converge.
    NoConvergence(&'static str),
    /// A kernel produced NaN or infinite entries.
    NonFinite(&'static str),
    /// Step size fell below the resolvable threshold in the reference integrator.
    StepSizeUnderflow { t: f64 },
    /// Time grids of two propagation results differ.
    GridMismatch,
    IndexOutOfRange { index: usize, dim: usize },
    InvalidInput(String),
    /// Failure raised while computing order `order` of an expansion.
    AtOrder { order: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn at_order(self, order: usize) -> Self {
        match self {
            e @ Error::AtOrder { .. } => e,
            e => Error::AtOrder {
                order,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, with any order annotation stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtOrder { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for small-divisor, secular-term and existence failures.
    pub fn is_expansion_failure(&self) -> bool {
        matches!(
            self.root(),
            Error::Resonance { .. }
                | Error::SecularTerm { .. }
                | Error::ExistenceCondition { .. }
                | Error::ResonantBasis { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::DiophantineMismatch => {
                write!(f, "spectral bases carry different diophantine parameters")
            }
            Error::ResonantBasis { k } => {
                write!(f, "resonant frequency vector: (k, omega) = 0 for k = {k:?}")
            }
            Error::InvalidFrequency(w) => write!(f, "invalid base frequency {w}"),
            Error::SecularTerm { k, rho, power } => write!(
                f,
                "secular term: mode k = {k:?}, rho = {rho}, power t^{power} has no limiting mean"
            ),
            Error::Resonance {
                left,
                right,
                k,
                divisor,
                threshold,
            } => write!(
                f,
                "resonance: |lambda_{} - lambda_{} - i(k, omega)| = {divisor:e} <= {threshold:e} for k = {k:?}",
                left + 1,
                right + 1
            ),
            Error::ExistenceCondition { left, right, k } => write!(
                f,
                "averaging existence condition fails at entry ({}, {}) of mode k = {k:?}",
                left + 1,
                right + 1
            ),
            Error::NonDiagonalizable => write!(f, "matrix is not diagonalizable"),
            Error::IllConditionedEigenbasis { condition } => {
                write!(f, "eigenbasis condition number {condition:e} exceeds 1e8")
            }
            Error::NoConvergence(what) => write!(f, "{what} did not converge"),
            Error::NonFinite(what) => write!(f, "{what} produced non-finite entries"),
            Error::StepSizeUnderflow { t } => write!(f, "step size underflow at t = {t}"),
            Error::GridMismatch => write!(f, "time grids differ"),
            Error::IndexOutOfRange { index, dim } => {
                write!(f, "index {index} out of range for dimension {dim}")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::AtOrder { order, source } => write!(f, "at order {order}: {source}"),
        }
    }
}

impl core::error::Error for Error {}
