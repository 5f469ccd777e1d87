use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exp_poly::{ExpPolyMatrix, SpectralBasis};
use crate::linalg::ComplexMatrix;

/// Tolerance for the skew-Hermitian flag check.
const SKEW_TOL: f64 = 1e-12;

/// `dx/dt = (A0 + sum_n eps^n A_n(t)) x`.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    a0: ComplexMatrix,
    terms: Vec<ExpPolyMatrix>,
    epsilon: f64,
    period: Option<f64>,
    skew_hermitian: bool,
    basis: Arc<SpectralBasis>,
}

impl SystemSpec {
    /// Builds a system with `terms[n - 1] = A_n`, all brought onto one spectral basis.
    pub fn new(a0: ComplexMatrix, terms: Vec<ExpPolyMatrix>, epsilon: f64) -> Result<Self> {
        if !a0.is_finite() {
            return Err(Error::NonFinite("A0"));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid("epsilon must be finite and non-negative"));
        }
        let dim = a0.dim();
        let mut basis = terms
            .first()
            .map(|t| t.basis().clone())
            .unwrap_or_else(|| Arc::new(SpectralBasis::empty()));
        for t in &terms {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: t.dim(),
                });
            }
            let (joined, _, _) = basis.union(t.basis())?;
            if joined != *basis {
                basis = Arc::new(joined);
            }
        }
        let terms = terms
            .iter()
            .map(|t| t.with_basis(basis.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(SystemSpec {
            a0,
            terms,
            epsilon,
            period: None,
            skew_hermitian: false,
            basis,
        })
    }

    /// Declares the system periodic with period `t`; every mode must be `T`-periodic.
    pub fn with_period(mut self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid("period must be positive"));
        }
        for a in &self.terms {
            for term in a.terms() {
                let nu = self.basis.frequency_of(term.k);
                let cycles = nu * t / (2.0 * PI);
                let periodic = term.power == 0
                    && term.rho == 0.0
                    && (cycles - cycles.round()).abs() <= 1e-9 * cycles.abs().max(1.0);
                if !periodic {
                    return Err(Error::invalid("a perturbation mode is not periodic with the declared period"));
                }
            }
        }
        self.period = Some(t);
        Ok(self)
    }

    /// Sets the skew-Hermitian flag after checking `A0` and every `A_n`.
    pub fn with_skew_hermitian(mut self, flag: bool) -> Result<Self> {
        if flag {
            if self.a0.skew_hermitian_defect() > SKEW_TOL {
                return Err(Error::invalid("A0 is not skew-Hermitian"));
            }
            if self.terms.iter().any(|a| a.skew_hermitian_defect() > SKEW_TOL) {
                return Err(Error::invalid("a perturbation term is not skew-Hermitian"));
            }
        }
        self.skew_hermitian = flag;
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid("epsilon must be finite and non-negative"));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.a0.dim()
    }

    pub fn a0(&self) -> &ComplexMatrix {
        &self.a0
    }

    /// `A_1, A_2, ...`.
    pub fn terms(&self) -> &[ExpPolyMatrix] {
        &self.terms
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn is_skew_hermitian(&self) -> bool {
        self.skew_hermitian
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    /// `A(t) = A0 + sum eps^n A_n(t)` as a single exponential polynomial.
    pub fn generator(&self, epsilon: f64) -> Result<ExpPolyMatrix> {
        let mut a = ExpPolyMatrix::constant(self.a0.clone(), self.basis.clone());
        let mut p = 1.0;
        for t in &self.terms {
            p *= epsilon;
            a = ExpPolyMatrix::linear_combination(
                crate::Complex64::new(1.0, 0.0),
                &a,
                crate::Complex64::new(p, 0.0),
                t,
            )?;
        }
        Ok(a)
    }

    /// `A(t)` at the system's own `epsilon`.
    pub fn eval(&self, t: f64) -> ComplexMatrix {
        let mut a = self.a0.clone();
        let mut p = 1.0;
        for term in &self.terms {
            p *= self.epsilon;
            a.axpy(crate::Complex64::new(p, 0.0), &term.eval(t));
        }
        a
    }

    /// The same dynamics with everything moved into a single first-order term:
    /// `A0 = 0`, `A_1 = A(t)`, `eps = 1`.
    pub fn absorbed(&self) -> Result<Self> {
        let a = self.generator(self.epsilon)?;
        let mut out = SystemSpec::new(ComplexMatrix::zeros(self.dim()), alloc::vec![a], 1.0)?;
        out.period = self.period;
        out.skew_hermitian = self.skew_hermitian;
        Ok(out)
    }
}
