use super::matrix::ComplexMatrix;

/// Partial sum `sum_{k=0}^{K} ad_Omega^k(C) / (k+1)!`.
pub fn dexp_apply(omega: &ComplexMatrix, c: &ComplexMatrix, k_max: usize) -> ComplexMatrix {
    let mut term = c.clone();
    let mut sum = c.clone();
    let mut fact = 1.0;
    for k in 1..=k_max {
        term = omega.commutator(&term);
        if term.is_zero() {
            break;
        }
        fact *= (k + 1) as f64;
        sum.axpy(num_complex::Complex64::new(1.0 / fact, 0.0), &term);
    }
    sum
}
