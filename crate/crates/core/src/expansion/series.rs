use alloc::vec::Vec;

use super::Method;
use crate::exp_poly::ExpPolyMatrix;
use crate::linalg::ComplexMatrix;

/// Frame in which the series was computed.
#[derive(Clone, Debug, PartialEq)]
pub enum Picture {
    Direct,
    /// Perturbation conjugated by `exp(t A0)`; the propagator is `exp(t A0) U_I(t)`.
    Interaction { a0: ComplexMatrix },
}

/// Per-order bookkeeping collected during the recursion.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    /// Number of stored terms of `Omega_n` (or `P_n`), `n = 1..=N`.
    pub term_counts: Vec<usize>,
    /// Smallest `|divisor| / threshold` met by a homological solve, if any.
    pub resonance_margin: Option<f64>,
    /// Smallest nonzero divisor modulus met by a homological solve.
    pub min_divisor: Option<f64>,
    /// Orders at which exactly resonant entries were integrated into secular terms.
    pub secular_orders: Vec<usize>,
}

/// Output of an expansion: `Omega_1..Omega_N` and `F_0..F_N` in the working frame.
#[derive(Clone, Debug)]
pub struct ExpansionSeries {
    pub(crate) method: Method,
    pub(crate) order: usize,
    pub(crate) picture: Picture,
    pub(crate) skew_hermitian: bool,
    pub(crate) a0: ComplexMatrix,
    pub(crate) omegas: Vec<ExpPolyMatrix>,
    pub(crate) f_terms: Vec<ExpPolyMatrix>,
    pub(crate) generators: Vec<ExpPolyMatrix>,
    pub(crate) particular: Vec<ExpPolyMatrix>,
    pub(crate) dyson: Vec<ExpPolyMatrix>,
    pub(crate) diagnostics: Diagnostics,
}

impl ExpansionSeries {
    pub fn method(&self) -> Method {
        self.method
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn picture(&self) -> &Picture {
        &self.picture
    }

    pub fn is_skew_hermitian(&self) -> bool {
        self.skew_hermitian
    }

    /// `A0` of the working frame (zero after an interaction-picture lift).
    pub fn a0(&self) -> &ComplexMatrix {
        &self.a0
    }

    /// `Omega_1..Omega_N`; for standard perturbation theory `P_1..P_N`.
    pub fn omegas(&self) -> &[ExpPolyMatrix] {
        &self.omegas
    }

    pub fn omega(&self, n: usize) -> &ExpPolyMatrix {
        &self.omegas[n - 1]
    }

    /// `F_0..F_N`; constant except for quantum averaging.
    pub fn f_terms(&self) -> &[ExpPolyMatrix] {
        &self.f_terms
    }

    /// `F_n` as a constant matrix, `None` if it depends on time.
    pub fn f_constant(&self, n: usize) -> Option<ComplexMatrix> {
        let f = &self.f_terms[n];
        if f.terms().all(|t| t.is_constant_mode() && t.power == 0) {
            Some(f.constant_part())
        } else {
            None
        }
    }

    /// Right-hand sides `F_n + Omega_n' + [Omega_n, A0]` solved at each order, `n = 1..=N`.
    pub fn generators(&self) -> &[ExpPolyMatrix] {
        &self.generators
    }

    /// Quantum averaging only: the particular solutions before the `Omega_n(0) = 0` correction.
    pub fn particular_solutions(&self) -> &[ExpPolyMatrix] {
        &self.particular
    }

    /// Standard perturbation theory only: `g_1..g_N`.
    pub fn dyson_terms(&self) -> &[ExpPolyMatrix] {
        &self.dyson
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    /// `sum_{n <= N} eps^n F_n` evaluated at `t` (with `F_0`).
    pub fn f_sum(&self, t: f64, epsilon: f64) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.a0.dim());
        let mut p = 1.0;
        for f in &self.f_terms {
            out.axpy(crate::Complex64::new(p, 0.0), &f.eval(t));
            p *= epsilon;
        }
        out
    }

    /// Effective Hamiltonian `i F(eps)` of a method with constant `F`.
    pub fn effective_hamiltonian(&self, epsilon: f64) -> Option<ComplexMatrix> {
        if (0..self.f_terms.len()).any(|n| self.f_constant(n).is_none()) {
            return None;
        }
        Some(self.f_sum(0.0, epsilon).scale(crate::Complex64::new(0.0, 1.0)))
    }
}
