use alloc::vec::Vec;

use super::system::SystemSpec;
use crate::error::{Error, Result};
use crate::exp_poly::ExpPolyMatrix;
use crate::linalg::{eig, ComplexMatrix};

/// Standard perturbation (Dyson) terms of `x' = (A0 + eps A1(t)) x`.
#[derive(Clone, Debug)]
pub struct DysonTerms {
    /// `g_n = int_0^t A_I(s) g_{n-1}(s) ds` with `A_I = exp(-t A0) A1 exp(t A0)`.
    pub g: Vec<ExpPolyMatrix>,
    /// `P_n = exp(t A0) g_n exp(-t A0)`.
    pub p: Vec<ExpPolyMatrix>,
}

/// Computes `g_1..g_N` and `P_1..P_N`.
///
/// The truncated sum `exp(t A0) (I + sum eps^n g_n)` is not unitary in general.
pub fn dyson_terms(sys: &SystemSpec, order: usize) -> Result<DysonTerms> {
    if sys.terms().iter().skip(1).any(|a| !a.is_empty()) {
        return Err(Error::invalid(
            "standard perturbation theory needs a single first-order perturbation term",
        ));
    }
    let e = eig(sys.a0())?.require_well_conditioned()?;
    let dim = sys.dim();
    let a1 = sys
        .terms()
        .first()
        .cloned()
        .unwrap_or_else(|| ExpPolyMatrix::zero(dim, sys.basis().clone()));
    let a_i = a1.conjugate_exp(&e, 1)?;
    let mut prev = ExpPolyMatrix::constant(ComplexMatrix::identity(dim), a_i.basis().clone());
    let mut g = Vec::with_capacity(order);
    let mut p = Vec::with_capacity(order);
    for n in 1..=order {
        let next = a_i.mul(&prev).map_err(|err| err.at_order(n))?.integrate0();
        p.push(next.conjugate_exp(&e, -1).map_err(|err| err.at_order(n))?);
        g.push(next.clone());
        prev = next;
    }
    Ok(DysonTerms { g, p })
}
