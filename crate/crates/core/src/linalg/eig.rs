use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::matrix::{ComplexMatrix, ONE, ZERO};
use super::schur::schur;
use crate::error::{Error, Result};

/// Condition number above which an eigenbasis is rejected by consumers that need one.
pub const MAX_EIGENBASIS_CONDITION: f64 = 1e8;

/// Right eigenpairs `A V = V diag(lambda)` together with `V^{-1}`.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    pub values: Vec<Complex64>,
    pub vectors: ComplexMatrix,
    pub inverse: ComplexMatrix,
    /// 2-norm condition number of `vectors`.
    pub condition: f64,
}

impl EigDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V^{-1} X V`.
    pub fn to_eigenbasis(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.inverse.matmul(x).matmul(&self.vectors)
    }

    /// `V X V^{-1}`.
    pub fn from_eigenbasis(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.vectors.matmul(x).matmul(&self.inverse)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.from_eigenbasis(&ComplexMatrix::diagonal(&self.values))
    }

    /// `||A V - V diag(lambda)||_F`.
    pub fn residual(&self, a: &ComplexMatrix) -> f64 {
        let av = a.matmul(&self.vectors);
        let vl = self.vectors.matmul(&ComplexMatrix::diagonal(&self.values));
        (&av - &vl).frobenius_norm()
    }

    /// Largest eigenvalue modulus, at least 1.
    pub fn scale(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(1.0, f64::max)
    }

    /// Errors when the eigenbasis condition number exceeds [`MAX_EIGENBASIS_CONDITION`].
    pub fn require_well_conditioned(self) -> Result<Self> {
        if self.condition > MAX_EIGENBASIS_CONDITION || !self.condition.is_finite() {
            return Err(Error::IllConditionedEigenbasis {
                condition: self.condition,
            });
        }
        Ok(self)
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let mut sym = h.clone();
    sym += &h.adjoint();
    let sym = sym.scale_real(0.5);
    let s = schur(&sym)?;
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| s.t[(i, i)].re).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(core::cmp::Ordering::Equal));
    let sorted: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let q = ComplexMatrix::from_fn(n, |i, j| s.q[(i, order[j])]);
    Ok((sorted, q))
}

/// 2-norm condition number via the extreme eigenvalues of `V^dagger V`.
pub fn condition_number(v: &ComplexMatrix) -> f64 {
    let g = v.adjoint().matmul(v);
    match hermitian_eig(&g) {
        Ok((vals, _)) => {
            let lo = vals.first().copied().unwrap_or(1.0);
            let hi = vals.last().copied().unwrap_or(1.0);
            if lo <= 0.0 {
                f64::INFINITY
            } else {
                (hi / lo).sqrt()
            }
        }
        Err(_) => f64::INFINITY,
    }
}

/// Eigendecomposition through the complex Schur form.
///
/// Normal inputs keep the unitary Schur vectors. Otherwise eigenvectors of the
/// triangular factor are found by back substitution; a defective eigenvalue
/// yields [`Error::NonDiagonalizable`].
pub fn eig(m: &ComplexMatrix) -> Result<EigDecomposition> {
    let n = m.dim();
    let s = schur(m)?;
    let values = s.eigenvalues();
    let norm_t = s.t.frobenius_norm().max(f64::MIN_POSITIVE);
    if s.departure_from_normality() <= 1e-13 * norm_t || n <= 1 {
        let inverse = s.q.adjoint();
        return Ok(EigDecomposition {
            values,
            vectors: s.q,
            inverse,
            condition: 1.0,
        });
    }
    let t = &s.t;
    let small = 1e-13 * norm_t;
    let mut y = ComplexMatrix::zeros(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut num = ZERO;
            for j in i + 1..=k {
                num += t[(i, j)] * y[(j, k)];
            }
            let denom = t[(i, i)] - lambda;
            if denom.norm() <= small {
                if num.norm() <= 1e-9 * norm_t {
                    y[(i, k)] = ZERO;
                } else {
                    return Err(Error::NonDiagonalizable);
                }
            } else {
                y[(i, k)] = -num / denom;
            }
        }
        let colnorm: f64 = (0..=k).map(|i| y[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..=k {
            y[(i, k)] /= colnorm;
        }
    }
    let vectors = s.q.matmul(&y);
    let condition = condition_number(&vectors);
    if !condition.is_finite() || condition > 1e14 {
        return Err(Error::NonDiagonalizable);
    }
    let inverse = vectors.inverse().map_err(|_| Error::NonDiagonalizable)?;
    Ok(EigDecomposition {
        values,
        vectors,
        inverse,
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::pauli;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn diagonal_input() {
        let d = ComplexMatrix::diagonal(&[c(1.0), c(2.0), c(3.0)]);
        let e = eig(&d).unwrap();
        let mut vals: Vec<f64> = e.values.iter().map(|z| z.re).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(vals, [1.0, 2.0, 3.0]);
        assert!(e.residual(&d) < 1e-14);
        assert!((e.condition - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_z() {
        let e = eig(&pauli::sigma3()).unwrap();
        let mut vals: Vec<f64> = e.values.iter().map(|z| z.re).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(vals, [-1.0, 1.0]);
    }

    #[test]
    fn random_normal_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..7 {
            let h = ComplexMatrix::from_fn(n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            // unitary from the Schur vectors of a random matrix, then a normal matrix
            let q = schur(&h).unwrap().q;
            let d: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            let m = q.matmul(&ComplexMatrix::diagonal(&d)).matmul(&q.adjoint());
            let e = eig(&m).unwrap();
            assert!((&e.reconstruct() - &m).frobenius_norm() < 1e-11 * m.frobenius_norm());
            assert!(e.residual(&m) <= 1e-10 * m.frobenius_norm());
        }
    }

    #[test]
    fn non_normal_diagonalizable() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 5.0, 2.0], &[0.0, 2.0, -1.0], &[0.5, 0.0, 3.0]]);
        let e = eig(&m).unwrap();
        assert!(e.residual(&m) <= 1e-10 * m.frobenius_norm());
        assert!(e.condition > 1.0);
        let id = e.vectors.matmul(&e.inverse);
        assert!((&id - &ComplexMatrix::identity(3)).max_abs() < 1e-12);
    }

    #[test]
    fn jordan_block_is_rejected() {
        let j = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[0.0, 2.0]]);
        assert_eq!(eig(&j).unwrap_err(), Error::NonDiagonalizable);
    }

    #[test]
    fn degenerate_but_diagonalizable() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 3.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]);
        let e = eig(&m).unwrap();
        assert!(e.residual(&m) <= 1e-10 * m.frobenius_norm());
    }
}
