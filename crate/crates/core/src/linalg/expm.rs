use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::eig::hermitian_eig;
use super::matrix::{ComplexMatrix, I};
use super::schur::schur;
use crate::error::{Error, Result};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn is_normal(m: &ComplexMatrix) -> bool {
    let mh = m.adjoint();
    let comm = m.matmul(&mh) - &mh.matmul(m);
    let scale = m.frobenius_norm();
    comm.frobenius_norm() <= 1e-13 * scale * scale
}

/// Matrix exponential.
///
/// Normal matrices go through their Schur (eigen) basis; everything else uses
/// degree-13 Padé with scaling and squaring.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_finite() {
        return Err(Error::NonFinite("expm input"));
    }
    let n = m.dim();
    if m.is_zero() {
        return Ok(ComplexMatrix::identity(n));
    }
    if n == 1 {
        return ComplexMatrix::from_row_major(1, alloc::vec![m[(0, 0)].exp()])?
            .ensure_finite("expm");
    }
    if is_normal(m) {
        let s = schur(m)?;
        let d: alloc::vec::Vec<Complex64> = (0..n).map(|i| s.t[(i, i)].exp()).collect();
        return s
            .q
            .matmul(&ComplexMatrix::diagonal(&d))
            .matmul(&s.q.adjoint())
            .ensure_finite("expm");
    }
    expm_pade(m)
}

/// Scaling-and-squaring with the degree-13 diagonal Padé approximant.
pub fn expm_pade(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.dim();
    let norm = m.norm_one();
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    if s > 1000 {
        return Err(Error::NonFinite("expm scaling"));
    }
    let a = m.scale_real(2f64.powi(-s));
    let id = ComplexMatrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let b = &PADE13;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| {
        let mut r = a6.scale_real(c6);
        r.axpy(Complex64::new(c4, 0.0), &a4);
        r.axpy(Complex64::new(c2, 0.0), &a2);
        r.axpy(Complex64::new(c0, 0.0), &id);
        r
    };
    let mut u_inner = a6.matmul(&lin(b[13], b[11], b[9], 0.0));
    u_inner += &lin(b[7], b[5], b[3], b[1]);
    let u = a.matmul(&u_inner);
    let mut v = a6.matmul(&lin(b[12], b[10], b[8], 0.0));
    v += &lin(b[6], b[4], b[2], b[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.solve(&p)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    r.ensure_finite("expm")
}

/// `exp` of the skew-Hermitian part `(M - M^dagger)/2`, unitary to rounding.
pub fn expm_skew_hermitian(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let k = m.skew_hermitian_part();
    // H = iK is Hermitian and K = -iH.
    let h = k.scale(I);
    let (vals, q) = hermitian_eig(&h)?;
    let d: alloc::vec::Vec<Complex64> =
        vals.iter().map(|&l| Complex64::new(0.0, -l).exp()).collect();
    q.matmul(&ComplexMatrix::diagonal(&d))
        .matmul(&q.adjoint())
        .ensure_finite("expm")
}
