use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::exp_poly::ExpPolyMatrix;
use crate::linalg::spectral_norm;
use crate::quadrature::{adaptive, gk15};

/// Largest time considered before declaring the horizon infinite.
const TIME_CAP: f64 = 1e6;

/// Threshold on `int_0^t ||A(s)||_2 ds` guaranteeing convergence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HorizonBound {
    /// `pi`.
    Magnus,
    /// `0.20925`.
    FloquetMagnus,
    Custom(f64),
}

impl HorizonBound {
    pub fn value(self) -> f64 {
        match self {
            HorizonBound::Magnus => PI,
            HorizonBound::FloquetMagnus => 0.20925,
            HorizonBound::Custom(v) => v,
        }
    }
}

fn segment(a: &ExpPolyMatrix, lo: f64, hi: f64) -> f64 {
    let f = |s: f64| spectral_norm(&a.eval(s));
    adaptive(f, lo, hi, 1e-13, 1e-12).unwrap_or_else(|_| gk15(&mut |s: f64| spectral_norm(&a.eval(s)), lo, hi).0)
}

/// Upper bound of `int_t^inf ||A(s)||_2 ds` when every term decays, else `None`.
fn decaying_tail(a: &ExpPolyMatrix, t: f64) -> Option<f64> {
    let mut total = 0.0;
    for term in a.terms() {
        if term.rho >= 0.0 {
            return None;
        }
        let r = -term.rho;
        let m = term.power as i32;
        // int_t^inf s^m e^{-r s} ds = e^{-r t} sum_{j=0}^m m!/j! t^j / r^{m-j+1}
        let mut sum = 0.0;
        let mut ratio = 1.0;
        for j in (0..=m).rev() {
            sum += ratio * t.powi(j) / r.powi(m - j + 1);
            ratio *= j as f64;
        }
        total += term.coeff.frobenius_norm() * (-r * t).exp() * sum;
    }
    Some(total)
}

/// Time `t_f` at which `int_0^t ||A(s)||_2 ds` reaches `bound`, or `+inf` if it never does.
///
/// The integral is accumulated over panels of adaptive Gauss–Kronrod quadrature
/// and the crossing is located by bisection to well below `1e-4`.
pub fn convergence_horizon(a: &ExpPolyMatrix, bound: HorizonBound) -> f64 {
    let target = bound.value();
    if a.is_empty() || target <= 0.0 {
        return if target <= 0.0 { 0.0 } else { f64::INFINITY };
    }
    let fastest = a
        .terms()
        .map(|t| a.exponent(t.k, t.rho).norm())
        .fold(0.0f64, f64::max);
    let h = (2.0 / fastest.max(1e-12)).min(1.0);
    let mut t = 0.0;
    let mut g = 0.0;
    while t < TIME_CAP {
        let piece = segment(a, t, t + h);
        if g + piece >= target {
            let (mut lo, mut hi) = (t, t + h);
            while hi - lo > 1e-12 * hi.max(1.0) {
                let mid = 0.5 * (lo + hi);
                if g + segment(a, t, mid) >= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        g += piece;
        t += h;
        if let Some(tail) = decaying_tail(a, t) {
            if g + tail < target {
                return f64::INFINITY;
            }
        }
    }
    f64::INFINITY
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exp_poly::SpectralBasis;
    use crate::linalg::{pauli, ComplexMatrix};
    use alloc::sync::Arc;

    #[test]
    fn constant_generator() {
        let a = ExpPolyMatrix::constant(pauli::sigma1().scale_real(2.0), Arc::new(SpectralBasis::empty()));
        let tf = convergence_horizon(&a, HorizonBound::Magnus);
        assert!((tf - PI / 2.0).abs() < 1e-10);
        let zero = ExpPolyMatrix::zero(2, Arc::new(SpectralBasis::empty()));
        assert_eq!(convergence_horizon(&zero, HorizonBound::Magnus), f64::INFINITY);
    }

    #[test]
    fn decaying_generator_is_unbounded() {
        let mut a = ExpPolyMatrix::zero(2, Arc::new(SpectralBasis::empty()));
        a.add_term(&[], -1.0, 0, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(convergence_horizon(&a, HorizonBound::Magnus), f64::INFINITY);
        let t = convergence_horizon(&a, HorizonBound::Custom(0.5));
        assert!((t - 2f64.ln()).abs() < 1e-10);
    }
}
