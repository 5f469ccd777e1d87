#[allow(unused_imports)]
use num_traits::Float;

use super::eig::hermitian_eig;
use super::matrix::ComplexMatrix;

/// Largest singular value, `sqrt(lambda_max(M^dagger M))`.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.dim() == 0 || m.is_zero() {
        return 0.0;
    }
    let g = m.adjoint().matmul(m);
    match hermitian_eig(&g) {
        Ok((vals, _)) => vals.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(_) => f64::NAN,
    }
}

pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.frobenius_norm()
}

/// `||U^dagger U - I||_2`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let d = u.adjoint().matmul(u) - &ComplexMatrix::identity(u.dim());
    spectral_norm(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::pauli;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pauli_x_norms() {
        let s = pauli::sigma1();
        assert!((spectral_norm(&s) - 1.0).abs() < 1e-15);
        assert!((frobenius_norm(&s) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn spectral_below_frobenius() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..7 {
            let m = ComplexMatrix::from_fn(n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let s = spectral_norm(&m);
            assert!(s <= m.frobenius_norm() * (1.0 + 1e-14));
            assert!(s >= m.frobenius_norm() / (n as f64).sqrt() * (1.0 - 1e-14));
        }
    }

    #[test]
    fn rank_one_norm() {
        // u v^T has spectral norm |u||v|
        let m = ComplexMatrix::from_fn(3, |i, j| Complex64::new((i + 1) as f64 * (j as f64 - 1.5), 0.0));
        let u = (1.0f64 + 4.0 + 9.0).sqrt();
        let v = (2.25f64 + 0.25 + 0.25).sqrt();
        assert!((spectral_norm(&m) - u * v).abs() < 1e-13);
    }
}
