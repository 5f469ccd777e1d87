//! Complex Schur decomposition `M = Q T Q^dagger` by Hessenberg reduction
//! followed by single-shift QR sweeps with Givens rotations.

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Schur {
    /// Unitary factor.
    pub q: ComplexMatrix,
    /// Upper-triangular factor.
    pub t: ComplexMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> alloc::vec::Vec<Complex64> {
        (0..self.t.dim()).map(|i| self.t[(i, i)]).collect()
    }

    /// Frobenius norm of the strictly upper part of `T`.
    pub fn departure_from_normality(&self) -> f64 {
        let n = self.t.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += self.t[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    }
}

/// Rotation `[c s; -conj(s) c]` mapping `(a, b)` to `(r, 0)`.
#[derive(Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    fn new(a: Complex64, b: Complex64) -> Self {
        let bn = b.norm();
        if bn == 0.0 {
            return Givens { c: 1.0, s: ZERO };
        }
        let an = a.norm();
        if an == 0.0 {
            return Givens {
                c: 0.0,
                s: b.conj() / bn,
            };
        }
        let r = an.hypot(bn);
        Givens {
            c: an / r,
            s: (a / an) * b.conj() / r,
        }
    }

    /// Left-multiplies rows `k`, `k+1` over columns `cols`.
    fn apply_rows(&self, m: &mut ComplexMatrix, k: usize, cols: core::ops::Range<usize>) {
        for j in cols {
            let x = m[(k, j)];
            let y = m[(k + 1, j)];
            m[(k, j)] = x * self.c + self.s * y;
            m[(k + 1, j)] = -self.s.conj() * x + y * self.c;
        }
    }

    /// Right-multiplies columns `k`, `k+1` by the adjoint, over rows `rows`.
    fn apply_cols(&self, m: &mut ComplexMatrix, k: usize, rows: core::ops::Range<usize>) {
        for i in rows {
            let x = m[(i, k)];
            let y = m[(i, k + 1)];
            m[(i, k)] = x * self.c + y * self.s.conj();
            m[(i, k + 1)] = -x * self.s + y * self.c;
        }
    }
}

fn hessenberg(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.dim();
    let mut h = m.clone();
    let mut q = ComplexMatrix::identity(n);
    if n < 3 {
        return (h, q);
    }
    let mut v = alloc::vec![ZERO; n];
    for k in 0..n - 2 {
        let alpha: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let tail: f64 = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>();
        if alpha == 0.0 || tail == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        for i in 0..n {
            v[i] = if i <= k { ZERO } else { h[(i, k)] };
        }
        v[k + 1] += phase * alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let beta = 2.0 / vnorm2;
        // h <- (I - beta v v^dagger) h
        for j in 0..n {
            let mut dot = ZERO;
            for i in k + 1..n {
                dot += v[i].conj() * h[(i, j)];
            }
            dot *= beta;
            for i in k + 1..n {
                let vi = v[i];
                h[(i, j)] -= vi * dot;
            }
        }
        // h <- h (I - beta v v^dagger), q likewise
        for mat in [&mut h, &mut q] {
            for i in 0..n {
                let mut dot = ZERO;
                for j in k + 1..n {
                    dot += mat[(i, j)] * v[j];
                }
                dot *= beta;
                for j in k + 1..n {
                    let vj = v[j].conj();
                    mat[(i, j)] -= dot * vj;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let l1 = (a + d) * 0.5 + disc;
    let l2 = (a + d) * 0.5 - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur form of a square matrix.
pub fn schur(m: &ComplexMatrix) -> Result<Schur> {
    if !m.is_finite() {
        return Err(Error::NonFinite("schur input"));
    }
    let n = m.dim();
    let (mut h, mut q) = hessenberg(m);
    if n <= 1 {
        return Ok(Schur { q, t: h });
    }
    let scale = h.max_abs();
    let tiny = f64::MIN_POSITIVE / f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let mut diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if diag == 0.0 {
                diag = scale;
            }
            if sub <= f64::EPSILON * diag || sub <= tiny {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n.max(10) {
            return Err(Error::NoConvergence("complex Schur QR iteration"));
        }
        let mut shift = wilkinson_shift(
            h[(hi - 1, hi - 1)],
            h[(hi - 1, hi)],
            h[(hi, hi - 1)],
            h[(hi, hi)],
        );
        if iter % 11 == 10 {
            // exceptional shift to break cycles
            shift = h[(hi, hi)] + Complex64::new(0.75, 0.4375) * h[(hi, hi - 1)].norm();
        }
        for k in l..=hi {
            h[(k, k)] -= shift;
        }
        let mut rots = alloc::vec::Vec::with_capacity(hi - l);
        for k in l..hi {
            let g = Givens::new(h[(k, k)], h[(k + 1, k)]);
            g.apply_rows(&mut h, k, k..n);
            h[(k + 1, k)] = ZERO;
            rots.push(g);
        }
        for (idx, g) in rots.iter().enumerate() {
            let k = l + idx;
            g.apply_cols(&mut h, k, 0..(k + 2).min(hi + 1));
            g.apply_cols(&mut q, k, 0..n);
        }
        for k in l..=hi {
            h[(k, k)] += shift;
        }
    }
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(Schur { q, t: h })
}
