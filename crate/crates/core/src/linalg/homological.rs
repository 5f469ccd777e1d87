use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::eig::{eig, EigDecomposition};
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Small-divisor bound `delta / max(1, |k|_1)^gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diophantine {
    pub delta: f64,
    pub gamma: f64,
}

impl Diophantine {
    pub const DEFAULT_DELTA: f64 = 1e-8;

    pub fn new(delta: f64, gamma: f64) -> Self {
        Diophantine { delta, gamma }
    }

    /// Default parameters for `r` base frequencies: `delta = 1e-8`, `gamma = max(r, 2)`.
    pub fn for_rank(r: usize) -> Self {
        Diophantine {
            delta: Self::DEFAULT_DELTA,
            gamma: (r.max(2)) as f64,
        }
    }

    pub fn threshold(&self, k: &[i32]) -> f64 {
        let k1: i64 = k.iter().map(|&x| (x as i64).abs()).sum();
        self.delta / (k1.max(1) as f64).powf(self.gamma)
    }
}

/// Applies `X -> -[A0, X] + i theta X`.
pub fn homological_operator(a0: &ComplexMatrix, theta: f64, x: &ComplexMatrix) -> ComplexMatrix {
    let mut out = x.scale(Complex64::new(0.0, theta));
    out -= &a0.commutator(x);
    out
}

/// Solves `-[A0, X] + i theta X = f` through the eigenbasis of `A0`.
///
/// `k` labels the Fourier mode (used for the threshold and in the error).
pub fn homological_solve(
    a0: &ComplexMatrix,
    theta: f64,
    f: &ComplexMatrix,
    dio: &Diophantine,
    k: &[i32],
) -> Result<ComplexMatrix> {
    a0.check_same_dim(f)?;
    let e = eig(a0)?;
    homological_solve_with(&e, theta, f, dio, k)
}

/// As [`homological_solve`] with a precomputed eigendecomposition.
pub fn homological_solve_with(
    e: &EigDecomposition,
    theta: f64,
    f: &ComplexMatrix,
    dio: &Diophantine,
    k: &[i32],
) -> Result<ComplexMatrix> {
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: f.dim(),
        });
    }
    let n = f.dim();
    let threshold = dio.threshold(k);
    let shift = Complex64::new(0.0, theta);
    // every pair is checked, matching the divisor condition for all l, m
    let mut divisors = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let d = e.values[j] - e.values[i] + shift;
            if d.norm() <= threshold {
                return Err(Error::Resonance {
                    left: i,
                    right: j,
                    k: k.to_vec(),
                    divisor: d.norm(),
                    threshold,
                });
            }
            divisors.push(d);
        }
    }
    let ft = e.to_eigenbasis(f);
    let xt = ComplexMatrix::from_fn(n, |i, j| ft[(i, j)] / divisors[i * n + j]);
    e.from_eigenbasis(&xt).ensure_finite("homological solve")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{I, ONE};

    fn diag_i() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[I, -I])
    }

    #[test]
    fn zero_generator() {
        let c = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let dio = Diophantine::for_rank(1);
        let x = homological_solve(&ComplexMatrix::zeros(2), 1.0, &c, &dio, &[1]).unwrap();
        assert!((&x - &c.scale(-I)).max_abs() < 1e-15);
    }

    #[test]
    fn single_entry_division() {
        let dio = Diophantine::for_rank(1);
        let f = ComplexMatrix::unit(2, 0, 1);
        let x = homological_solve(&diag_i(), 1.0, &f, &dio, &[1]).unwrap();
        let expected = ComplexMatrix::unit(2, 0, 1).scale(I);
        assert!((&x - &expected).max_abs() < 1e-15);
        let back = homological_operator(&diag_i(), 1.0, &x);
        assert!((&back - &f).max_abs() < 1e-15);
        let _ = ONE;
    }

    #[test]
    fn exact_resonance() {
        let dio = Diophantine::for_rank(1);
        let f = ComplexMatrix::unit(2, 0, 1);
        match homological_solve(&diag_i(), 2.0, &f, &dio, &[2]) {
            Err(Error::Resonance { left, right, k, divisor, .. }) => {
                assert_eq!((left, right), (0, 1));
                assert_eq!(k, [2]);
                assert!(divisor < 1e-15);
            }
            other => panic!("expected resonance, got {other:?}"),
        }
    }

    #[test]
    fn threshold_scaling() {
        let dio = Diophantine::new(1e-8, 2.0);
        assert_eq!(dio.threshold(&[0, 0]), 1e-8);
        assert!((dio.threshold(&[2, -1]) - 1e-8 / 9.0).abs() < 1e-24);
    }
}
