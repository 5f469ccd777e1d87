use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::quadrature::gauss_legendre;

/// Point counts tried per nesting level until two successive estimates agree.
const LADDER: [usize; 6] = [8, 12, 16, 24, 32, 48];

fn binomial(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// Permutations of `0..m` with weight `(-1)^d / C(m, d)`, `d` the number of descents.
fn weighted_permutations(m: usize) -> Vec<(Vec<usize>, f64)> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
    }
    let mut perms = Vec::new();
    let mut a: Vec<usize> = (0..m).collect();
    heap(m, &mut a, &mut perms);
    perms
        .into_iter()
        .map(|p| {
            let d = p.windows(2).filter(|w| w[0] > w[1]).count();
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            (p, sign / binomial(m, d))
        })
        .collect()
}

struct Nested<'a, F> {
    a: &'a F,
    n: usize,
    rule: (Vec<f64>, Vec<f64>),
    perms: Vec<(Vec<usize>, f64)>,
    values: Vec<ComplexMatrix>,
}

impl<F: Fn(f64) -> ComplexMatrix> Nested<'_, F> {
    /// Integrates levels `level..n` over `[0, upper]` with accumulated weight `w`.
    fn run(&mut self, level: usize, upper: f64, w: f64, acc: &mut ComplexMatrix) {
        let half = 0.5 * upper;
        for q in 0..self.rule.0.len() {
            let s = half * (1.0 + self.rule.0[q]);
            let wq = w * half * self.rule.1[q];
            self.values[level] = (self.a)(s);
            if level + 1 == self.n {
                self.leaf(wq, acc);
            } else {
                self.run(level + 1, s, wq, acc);
            }
        }
    }

    fn leaf(&self, w: f64, acc: &mut ComplexMatrix) {
        let last = &self.values[self.n - 1];
        for (perm, c) in &self.perms {
            let mut x = last.clone();
            for &i in perm.iter().rev() {
                x = self.values[i].commutator(&x);
            }
            acc.axpy(Complex64::new(w * c, 0.0), &x);
        }
    }
}

/// Magnus term `Omega_n(t)` from the explicit descent formula
///
/// ```text
/// Omega_n = 1/n sum_{sigma in S_{n-1}} (-1)^{d_sigma} / C(n-1, d_sigma)
///           int_{t > t_1 > ... > t_n > 0} [A(t_s1), [A(t_s2), ... [A(t_s(n-1)), A(t_n)]]]
/// ```
///
/// evaluated by nested Gauss–Legendre quadrature on the simplex, refined until two
/// successive point counts agree to `1e-13` relative.
pub fn magnus_direct_term<F: Fn(f64) -> ComplexMatrix>(a: &F, n: usize, t: f64) -> Result<ComplexMatrix> {
    if n == 0 || n > 4 {
        return Err(Error::invalid("the direct Magnus formula is available for 1 <= n <= 4"));
    }
    let dim = a(0.0).dim();
    let mut previous: Option<ComplexMatrix> = None;
    for &p in &LADDER {
        let mut nested = Nested {
            a,
            n,
            rule: gauss_legendre(p),
            perms: weighted_permutations(n - 1),
            values: vec![ComplexMatrix::zeros(dim); n],
        };
        let mut acc = ComplexMatrix::zeros(dim);
        nested.run(0, t, 1.0 / n as f64, &mut acc);
        if let Some(prev) = previous {
            let diff = (&acc - &prev).max_abs();
            if diff <= 1e-13 * acc.max_abs().max(1.0) {
                return Ok(acc);
            }
        }
        previous = Some(acc);
    }
    Err(Error::NoConvergence("nested quadrature for the direct Magnus term"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descent_weights() {
        let w2 = weighted_permutations(2);
        let total: f64 = w2.iter().map(|(_, c)| c).sum();
        assert_eq!(w2.len(), 2);
        // identity has weight 1, the swap has one descent: -1/2
        assert!((total - 0.5).abs() < 1e-15);
        assert_eq!(weighted_permutations(3).len(), 6);
    }

    #[test]
    fn linear_generator_second_order() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.5, -0.3]]);
        let y = ComplexMatrix::from_real_rows(&[&[0.2, -0.7], &[1.1, 0.4]]);
        let a = |s: f64| &x + &y.scale_real(s);
        let t = 1.3f64;
        let om2 = magnus_direct_term(&a, 2, t).unwrap();
        let expected = x.commutator(&y).scale_real(-t.powi(3) / 12.0);
        assert!((&om2 - &expected).max_abs() < 1e-14);
        let om1 = magnus_direct_term(&a, 1, t).unwrap();
        assert!((&om1 - &(&x.scale_real(t) + &y.scale_real(t * t / 2.0))).max_abs() < 1e-14);
    }
}
