use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::basis::{Reindex, SpectralBasis};
use crate::error::{Error, Result};
use crate::linalg::matrix::{ComplexMatrix, ZERO};
use crate::linalg::EigDecomposition;

/// Absolute tolerance for identifying real parts of exponents.
pub const RHO_TOL: f64 = 1e-13;
/// Default relative prune tolerance applied after ring operations.
pub const PRUNE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug)]
struct Rho(f64);

impl PartialEq for Rho {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Rho {}
impl PartialOrd for Rho {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Rho {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    k: Vec<i32>,
    power: u32,
    rho: Rho,
}

/// One stored term `coeff * t^power * exp((rho + i (k, omega)) t)`.
#[derive(Clone, Copy, Debug)]
pub struct Term<'a> {
    pub k: &'a [i32],
    pub rho: f64,
    pub power: u32,
    pub coeff: &'a ComplexMatrix,
}

impl Term<'_> {
    pub fn is_constant_mode(&self) -> bool {
        self.rho == 0.0 && self.k.iter().all(|&x| x == 0)
    }
}

/// Square matrix whose entries are finite sums of `c t^m exp(mu t)`.
#[derive(Clone, Debug)]
pub struct ExpPolyMatrix {
    dim: usize,
    basis: Arc<SpectralBasis>,
    terms: BTreeMap<Key, ComplexMatrix>,
}

fn snap_rho(rho: f64) -> f64 {
    if rho.abs() <= RHO_TOL {
        0.0
    } else {
        rho
    }
}

/// Running sum with Neumaier compensation.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Coefficients `a_0..a_m` with `d/dt [exp(mu t) sum_p a_p t^p] = t^m exp(mu t)`, `mu != 0`.
pub fn antiderivative_coefficients(mu: Complex64, m: u32) -> Vec<Complex64> {
    let mut a = vec![ZERO; m as usize + 1];
    a[m as usize] = mu.inv();
    for p in (1..=m as usize).rev() {
        a[p - 1] = -a[p] * p as f64 / mu;
    }
    a
}

impl ExpPolyMatrix {
    pub fn zero(dim: usize, basis: Arc<SpectralBasis>) -> Self {
        ExpPolyMatrix {
            dim,
            basis,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: ComplexMatrix, basis: Arc<SpectralBasis>) -> Self {
        let mut x = Self::zero(c.dim(), basis);
        let r = x.basis.rank();
        x.accumulate(vec![0; r], 0.0, 0, &c);
        x.drop_zeros();
        x
    }

    /// Single term `c t^power exp((rho + i (k, omega)) t)`.
    pub fn mode(
        c: ComplexMatrix,
        k: &[i32],
        rho: f64,
        power: u32,
        basis: Arc<SpectralBasis>,
    ) -> Result<Self> {
        let mut x = Self::zero(c.dim(), basis);
        x.add_term(k, rho, power, &c)?;
        Ok(x)
    }

    /// Adds a term, merging with an existing one of equal exponent and power.
    pub fn add_term(&mut self, k: &[i32], rho: f64, power: u32, c: &ComplexMatrix) -> Result<()> {
        if k.len() != self.basis.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.rank(),
                found: k.len(),
            });
        }
        if c.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: c.dim(),
            });
        }
        if !rho.is_finite() {
            return Err(Error::NonFinite("exponent real part"));
        }
        self.accumulate(k.to_vec(), rho, power, c);
        self.drop_zeros();
        Ok(())
    }

    fn accumulate(&mut self, k: Vec<i32>, rho: f64, power: u32, c: &ComplexMatrix) {
        self.accumulate_scaled(k, rho, power, Complex64::new(1.0, 0.0), c);
    }

    fn accumulate_scaled(&mut self, k: Vec<i32>, rho: f64, power: u32, alpha: Complex64, c: &ComplexMatrix) {
        let rho = snap_rho(rho);
        let lo = Key {
            k,
            power,
            rho: Rho(rho - RHO_TOL),
        };
        let hi = Key {
            k: lo.k.clone(),
            power,
            rho: Rho(rho + RHO_TOL),
        };
        if let Some((_, existing)) = self.terms.range_mut(&lo..=&hi).next() {
            existing.axpy(alpha, c);
            return;
        }
        let key = Key {
            k: lo.k,
            power,
            rho: Rho(rho),
        };
        let v = if alpha == Complex64::new(1.0, 0.0) {
            c.clone()
        } else {
            c.scale(alpha)
        };
        self.terms.insert(key, v);
    }

    fn drop_zeros(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = Term<'_>> {
        self.terms.iter().map(|(key, c)| Term {
            k: &key.k,
            rho: key.rho.0,
            power: key.power,
            coeff: c,
        })
    }

    /// `mu = rho + i (k, omega)`.
    pub fn exponent(&self, k: &[i32], rho: f64) -> Complex64 {
        Complex64::new(rho, self.basis.frequency_of(k))
    }

    pub fn max_power(&self) -> u32 {
        self.terms.keys().map(|k| k.power).max().unwrap_or(0)
    }

    pub fn max_term_norm(&self) -> f64 {
        self.terms.values().map(|c| c.frobenius_norm()).fold(0.0, f64::max)
    }

    /// Sum of the Frobenius norms of all coefficients.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.values().map(|c| c.frobenius_norm()).sum()
    }

    /// True iff every term has `power = 0` and `rho = 0`.
    pub fn is_quasi_periodic(&self) -> bool {
        self.terms.keys().all(|k| k.power == 0 && k.rho.0 == 0.0)
    }

    pub fn eval(&self, t: f64) -> ComplexMatrix {
        let n = self.dim;
        let mut acc = vec![(Compensated::default(), Compensated::default()); n * n];
        for (key, c) in &self.terms {
            let mu = self.exponent(&key.k, key.rho.0);
            let w = (mu * t).exp() * t.powi(key.power as i32);
            for (a, &z) in acc.iter_mut().zip(c.as_slice()) {
                let p = z * w;
                a.0.add(p.re);
                a.1.add(p.im);
            }
        }
        let data = acc
            .iter()
            .map(|(re, im)| Complex64::new(re.value(), im.value()))
            .collect();
        ComplexMatrix::from_row_major(n, data).expect("square data")
    }

    /// Removes terms whose Frobenius norm is at most `tol` times the largest term norm.
    pub fn prune(&self, tol: f64) -> Self {
        let mut out = self.clone();
        out.prune_in_place(tol, 0.0);
        out
    }

    fn prune_in_place(&mut self, tol: f64, scale_hint: f64) {
        let scale = self.max_term_norm().max(scale_hint);
        let cut = tol * scale;
        self.terms.retain(|_, c| {
            let nrm = c.frobenius_norm();
            nrm > cut && nrm != 0.0
        });
    }

    /// Rewrites the integer vectors into `basis` through `map`.
    pub fn reindexed(&self, basis: Arc<SpectralBasis>, map: &Reindex) -> Self {
        let mut out = Self::zero(self.dim, basis);
        for (key, c) in &self.terms {
            out.accumulate(map.apply(&key.k), key.rho.0, key.power, c);
        }
        out.drop_zeros();
        out
    }

    /// Same terms over a basis that extends the current one.
    pub fn with_basis(&self, basis: Arc<SpectralBasis>) -> Result<Self> {
        if Arc::ptr_eq(&basis, &self.basis) || *basis == *self.basis {
            let mut out = self.clone();
            out.basis = basis;
            return Ok(out);
        }
        if basis.extends(&self.basis) {
            let map = Reindex::padding(self.basis.rank(), basis.rank());
            return Ok(self.reindexed(basis, &map));
        }
        let (joined, _, into) = basis.union(&self.basis)?;
        if joined != *basis {
            return Err(Error::invalid("target basis does not contain the source basis"));
        }
        Ok(self.reindexed(basis, &into))
    }

    /// Brings two matrices onto a common basis.
    pub fn unify(x: &Self, y: &Self) -> Result<(Self, Self)> {
        if x.dim != y.dim {
            return Err(Error::DimensionMismatch {
                expected: x.dim,
                found: y.dim,
            });
        }
        if Arc::ptr_eq(&x.basis, &y.basis) || *x.basis == *y.basis {
            let mut y2 = y.clone();
            y2.basis = x.basis.clone();
            return Ok((x.clone(), y2));
        }
        if x.basis.extends(&y.basis) {
            return Ok((x.clone(), y.with_basis(x.basis.clone())?));
        }
        if y.basis.extends(&x.basis) {
            return Ok((x.with_basis(y.basis.clone())?, y.clone()));
        }
        let (joined, left, right) = x.basis.union(&y.basis)?;
        let joined = Arc::new(joined);
        Ok((x.reindexed(joined.clone(), &left), y.reindexed(joined, &right)))
    }

    /// `alpha X + beta Y`.
    pub fn linear_combination(alpha: Complex64, x: &Self, beta: Complex64, y: &Self) -> Result<Self> {
        let (x, y) = Self::unify(x, y)?;
        let scale = (alpha.norm() * x.max_term_norm()).max(beta.norm() * y.max_term_norm());
        let mut out = Self::zero(x.dim, x.basis.clone());
        for (key, c) in &x.terms {
            out.accumulate_scaled(key.k.clone(), key.rho.0, key.power, alpha, c);
        }
        for (key, c) in &y.terms {
            out.accumulate_scaled(key.k.clone(), key.rho.0, key.power, beta, c);
        }
        out.prune_in_place(PRUNE_TOL, scale);
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(Complex64::new(1.0, 0.0), self, Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(Complex64::new(1.0, 0.0), self, Complex64::new(-1.0, 0.0), other)
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.scale(alpha);
        }
        out.drop_zeros();
        out
    }

    pub fn scale_real(&self, alpha: f64) -> Self {
        self.scale(Complex64::new(alpha, 0.0))
    }

    /// Product; exponents and powers add.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (x, y) = Self::unify(self, other)?;
        let mut out = Self::zero(x.dim, x.basis.clone());
        for (kx, cx) in &x.terms {
            for (ky, cy) in &y.terms {
                let k: Vec<i32> = kx.k.iter().zip(&ky.k).map(|(a, b)| a + b).collect();
                out.accumulate(k, kx.rho.0 + ky.rho.0, kx.power + ky.power, &cx.matmul(cy));
            }
        }
        out.prune_in_place(PRUNE_TOL, x.max_term_norm() * y.max_term_norm());
        Ok(out)
    }

    /// `[X, Y] = XY - YX`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let (x, y) = Self::unify(self, other)?;
        let mut out = Self::zero(x.dim, x.basis.clone());
        for (kx, cx) in &x.terms {
            for (ky, cy) in &y.terms {
                let k: Vec<i32> = kx.k.iter().zip(&ky.k).map(|(a, b)| a + b).collect();
                out.accumulate(k, kx.rho.0 + ky.rho.0, kx.power + ky.power, &cx.commutator(cy));
            }
        }
        out.prune_in_place(PRUNE_TOL, 2.0 * x.max_term_norm() * y.max_term_norm());
        Ok(out)
    }

    /// `X(t) M - M X(t)` for a constant matrix `M`.
    pub fn commutator_const(&self, m: &ComplexMatrix) -> Self {
        let mut out = Self::zero(self.dim, self.basis.clone());
        for (key, c) in &self.terms {
            out.accumulate(key.k.clone(), key.rho.0, key.power, &c.commutator(m));
        }
        out.prune_in_place(PRUNE_TOL, 2.0 * self.max_term_norm() * m.frobenius_norm());
        out
    }

    /// Applies `f` to every coefficient matrix.
    pub fn map_coefficients(&self, mut f: impl FnMut(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let mut out = Self::zero(self.dim, self.basis.clone());
        for (key, c) in &self.terms {
            out.accumulate(key.k.clone(), key.rho.0, key.power, &f(c));
        }
        out.drop_zeros();
        out
    }

    /// `d/dt X`.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero(self.dim, self.basis.clone());
        for (key, c) in &self.terms {
            let mu = self.exponent(&key.k, key.rho.0);
            if mu != ZERO {
                out.accumulate_scaled(key.k.clone(), key.rho.0, key.power, mu, c);
            }
            if key.power > 0 {
                out.accumulate_scaled(
                    key.k.clone(),
                    key.rho.0,
                    key.power - 1,
                    Complex64::new(key.power as f64, 0.0),
                    c,
                );
            }
        }
        out.prune_in_place(PRUNE_TOL, self.max_term_norm());
        out
    }

    /// Canonical antiderivative: power rule for `mu = 0`, otherwise
    /// `exp(mu t) sum_p a_p t^p` with no constant of integration.
    pub fn antiderivative(&self) -> Self {
        let mut out = Self::zero(self.dim, self.basis.clone());
        for (key, c) in &self.terms {
            let constant_mode = key.rho.0 == 0.0 && key.k.iter().all(|&x| x == 0);
            if constant_mode {
                let p = key.power + 1;
                out.accumulate_scaled(key.k.clone(), 0.0, p, Complex64::new(1.0 / p as f64, 0.0), c);
            } else {
                let mu = self.exponent(&key.k, key.rho.0);
                for (p, a) in antiderivative_coefficients(mu, key.power).into_iter().enumerate() {
                    out.accumulate_scaled(key.k.clone(), key.rho.0, p as u32, a, c);
                }
            }
        }
        out.prune_in_place(PRUNE_TOL, 0.0);
        out
    }

    /// `int_0^t X(s) ds`.
    pub fn integrate0(&self) -> Self {
        let anti = self.antiderivative();
        let at_zero = anti.value_at_zero();
        let mut out = anti;
        let r = out.basis.rank();
        out.accumulate_scaled(vec![0; r], 0.0, 0, Complex64::new(-1.0, 0.0), &at_zero);
        // the constant term is exactly cancelled when it is the only power-0 contribution
        let key = Key {
            k: vec![0; r],
            power: 0,
            rho: Rho(0.0),
        };
        if let Some(c) = out.terms.get(&key) {
            if c.max_abs() <= 1e-15 * at_zero.max_abs() {
                out.terms.remove(&key);
            }
        }
        out.drop_zeros();
        out
    }

    /// Sum of all power-0 coefficients, i.e. the value at `t = 0`.
    pub fn value_at_zero(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        for (key, c) in &self.terms {
            if key.power == 0 {
                out += c;
            }
        }
        out
    }

    /// Coefficient of the `mu = 0`, `t^0` term.
    pub fn constant_part(&self) -> ComplexMatrix {
        let key = Key {
            k: vec![0; self.basis.rank()],
            power: 0,
            rho: Rho(0.0),
        };
        self.terms
            .get(&key)
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(self.dim))
    }

    /// Limiting mean `lim (1/T) int_0^T X`, defined only for quasi-periodic input.
    pub fn limiting_mean(&self) -> Result<ComplexMatrix> {
        if let Some(key) = self.terms.keys().find(|k| k.power > 0 || k.rho.0 != 0.0) {
            return Err(Error::SecularTerm {
                k: key.k.clone(),
                rho: key.rho.0,
                power: key.power,
            });
        }
        Ok(self.constant_part())
    }

    /// Pointwise adjoint: coefficients are adjointed and `mu` conjugated.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.dim, self.basis.clone());
        for (key, c) in &self.terms {
            let k: Vec<i32> = key.k.iter().map(|x| -x).collect();
            out.accumulate(k, key.rho.0, key.power, &c.adjoint());
        }
        out
    }

    /// `sum ||coeff(X + X^dagger)|| / (2 sum ||coeff(X)||)`; zero for skew-Hermitian families.
    pub fn skew_hermitian_defect(&self) -> f64 {
        let n = self.coefficient_norm();
        if n == 0.0 {
            return 0.0;
        }
        let mut sum = self.clone();
        for (key, c) in &self.adjoint().terms {
            sum.accumulate(key.k.clone(), key.rho.0, key.power, c);
        }
        sum.coefficient_norm() / (2.0 * n)
    }

    /// `exp(-sign t A0) X(t) exp(sign t A0)` in closed form.
    ///
    /// Each eigenbasis entry `(i, j)` is shifted by `sign (lambda_j - lambda_i)`; the
    /// imaginary parts of the shifts extend the basis and the real parts go to `rho`.
    pub fn conjugate_exp(&self, eig: &EigDecomposition, sign: i32) -> Result<Self> {
        if eig.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: eig.dim(),
            });
        }
        let n = self.dim;
        let s = if sign >= 0 { 1.0 } else { -1.0 };
        let snap = 1e-12 * eig.scale();
        let shifts: Vec<Complex64> = (0..n * n)
            .map(|ij| {
                let (i, j) = (ij / n, ij % n);
                let d = (eig.values[j] - eig.values[i]) * s;
                Complex64::new(if d.re.abs() <= snap { 0.0 } else { d.re }, d.im)
            })
            .collect();
        let imag: Vec<f64> = shifts.iter().map(|z| z.im).collect();
        let (basis, old, ks) = self.basis.extend(&imag)?;
        let basis = Arc::new(basis);
        let src = self.reindexed(basis.clone(), &old);

        // group entries with identical shift
        let mut groups: Vec<(Vec<i32>, f64, Vec<usize>)> = Vec::new();
        for (ij, (k, z)) in ks.iter().zip(&shifts).enumerate() {
            match groups
                .iter_mut()
                .find(|(gk, gr, _)| gk == k && (gr - z.re).abs() <= RHO_TOL)
            {
                Some(g) => g.2.push(ij),
                None => groups.push((k.clone(), z.re, vec![ij])),
            }
        }
        let mut out = Self::zero(n, basis);
        for (key, c) in &src.terms {
            let ct = eig.to_eigenbasis(c);
            for (gk, grho, members) in &groups {
                let mut masked = ComplexMatrix::zeros(n);
                for &ij in members {
                    masked[(ij / n, ij % n)] = ct[(ij / n, ij % n)];
                }
                if masked.is_zero() {
                    continue;
                }
                let k: Vec<i32> = key.k.iter().zip(gk).map(|(a, b)| a + b).collect();
                out.accumulate(k, key.rho.0 + grho, key.power, &eig.from_eigenbasis(&masked));
            }
        }
        out.prune_in_place(PRUNE_TOL, self.max_term_norm());
        Ok(out)
    }
}
