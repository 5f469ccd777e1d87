//! Per-order solvers for `Omega_n' + [Omega_n, A0] = F_n_rhs - F_n`.
//!
//! Each function receives the order-`n` right-hand side and decides which part
//! becomes `F_n`; the remainder is integrated into `Omega_n` with `Omega_n(0) = 0`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::ResonancePolicy;
use crate::error::{Error, Result};
use crate::exp_poly::{antiderivative_coefficients, ExpPolyMatrix, SpectralBasis};
use crate::linalg::{ComplexMatrix, Diophantine, EigDecomposition};

/// Relative size below which a divisor counts as exactly zero.
const EXACT_RESONANCE: f64 = 1e-12;

/// Small-divisor statistics of one homological solve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    pub resonance_margin: Option<f64>,
    pub min_divisor: Option<f64>,
    /// Exactly resonant entries were integrated into secular terms.
    pub secular: bool,
}

impl StepReport {
    fn record(&mut self, divisor: f64, threshold: f64) {
        let margin = divisor / threshold;
        self.resonance_margin = Some(self.resonance_margin.map_or(margin, |m| m.min(margin)));
        self.min_divisor = Some(self.min_divisor.map_or(divisor, |m| m.min(divisor)));
    }
}

/// Output of [`qa_step`].
#[derive(Clone, Debug)]
pub struct QaTerms {
    /// `F_n(t) = exp(t A0) F_n(0) exp(-t A0)`.
    pub f: ExpPolyMatrix,
    /// `Omega_n` with `Omega_n(0) = 0`.
    pub omega: ExpPolyMatrix,
    /// Mode-wise particular solution (the double limiting average).
    pub particular: ExpPolyMatrix,
}

/// Magnus: `F_n = 0`, `Omega_n = int_0^t rhs`.
pub fn magnus_step(rhs: &ExpPolyMatrix) -> (ComplexMatrix, ExpPolyMatrix) {
    (ComplexMatrix::zeros(rhs.dim()), rhs.integrate0())
}

/// Floquet–Magnus: `F_n` is the limiting mean, `Omega_n` integrates the oscillating rest.
pub fn fm_step(rhs: &ExpPolyMatrix) -> Result<(ComplexMatrix, ExpPolyMatrix)> {
    let mean = rhs.limiting_mean()?;
    let rest = rhs.sub(&ExpPolyMatrix::constant(mean.clone(), rhs.basis().clone()))?;
    Ok((mean, rest.integrate0()))
}

/// Remove-the-perturbation: `Omega_n = e^{t ad A0} int_0^t e^{-s ad A0} rhs(s) ds`, `F_n = 0`.
pub fn rm_step(rhs: &ExpPolyMatrix, eig: &EigDecomposition) -> Result<ExpPolyMatrix> {
    let inner = rhs.conjugate_exp(eig, 1)?.integrate0();
    inner.conjugate_exp(eig, -1)
}

enum Divisor {
    Exact,
    Near { divisor: f64, threshold: f64 },
    Regular { divisor: f64, threshold: f64 },
}

fn classify(kappa: Complex64, k: &[i32], dio: &Diophantine, scale: f64) -> Divisor {
    let divisor = kappa.norm();
    if divisor <= EXACT_RESONANCE * scale {
        return Divisor::Exact;
    }
    let threshold = dio.threshold(k);
    if divisor <= threshold {
        Divisor::Near { divisor, threshold }
    } else {
        Divisor::Regular { divisor, threshold }
    }
}

/// Eigenbasis accumulator for entrywise solutions.
struct EntryBuilder {
    dim: usize,
    basis: Arc<SpectralBasis>,
    terms: Vec<(Vec<i32>, f64, u32, ComplexMatrix)>,
}

impl EntryBuilder {
    fn new(dim: usize, basis: Arc<SpectralBasis>) -> Self {
        EntryBuilder {
            dim,
            basis,
            terms: Vec::new(),
        }
    }

    fn add(&mut self, k: &[i32], rho: f64, power: u32, i: usize, j: usize, v: Complex64) {
        let slot = self
            .terms
            .iter_mut()
            .find(|(tk, tr, tp, _)| tk == k && *tr == rho && *tp == power);
        match slot {
            Some((_, _, _, c)) => c[(i, j)] += v,
            None => {
                let mut c = ComplexMatrix::zeros(self.dim);
                c[(i, j)] = v;
                self.terms.push((k.to_vec(), rho, power, c));
            }
        }
    }

    /// Transforms back from the eigenbasis and returns the exponential polynomial.
    fn finish(self, eig: &EigDecomposition) -> Result<ExpPolyMatrix> {
        let mut out = ExpPolyMatrix::zero(self.dim, self.basis);
        for (k, rho, p, c) in &self.terms {
            let single = ExpPolyMatrix::mode(eig.from_eigenbasis(c), k, *rho, *p, out.basis().clone())?;
            out = out.add(&single)?;
        }
        Ok(out)
    }
}

fn spectral_scale(eig: &EigDecomposition, mu: Complex64) -> f64 {
    eig.scale().max(mu.norm())
}

/// Lie–Deprit: constant `F_n = <rhs> - [A0, M_n(0)]` and quasi-periodic `Omega_n`.
///
/// Entry `(i, j)` of a mode `c t^m exp(mu t)` in the eigenbasis of `A0` is solved with
/// divisor `kappa = mu + lambda_j - lambda_i`. Exactly resonant entries are integrated
/// by the power rule under [`ResonancePolicy::Secular`] and rejected under `Strict`.
pub fn ld_step(
    rhs: &ExpPolyMatrix,
    eig: &EigDecomposition,
    dio: &Diophantine,
    policy: ResonancePolicy,
) -> Result<(ComplexMatrix, ExpPolyMatrix, StepReport)> {
    let n = rhs.dim();
    let mean = match policy {
        ResonancePolicy::Strict => rhs.limiting_mean()?,
        ResonancePolicy::Secular => rhs.constant_part(),
    };
    let rest = rhs.sub(&ExpPolyMatrix::constant(mean.clone(), rhs.basis().clone()))?;
    let mut report = StepReport::default();
    let mut part = EntryBuilder::new(n, rest.basis().clone());
    let mut m0 = ComplexMatrix::zeros(n);
    for term in rest.terms() {
        let mu = rest.exponent(term.k, term.rho);
        let ct = eig.to_eigenbasis(term.coeff);
        let scale = spectral_scale(eig, mu);
        for i in 0..n {
            for j in 0..n {
                let c = ct[(i, j)];
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let kappa = mu + eig.values[j] - eig.values[i];
                match classify(kappa, term.k, dio, scale) {
                    Divisor::Exact => {
                        if policy == ResonancePolicy::Strict {
                            return Err(Error::Resonance {
                                left: i,
                                right: j,
                                k: term.k.to_vec(),
                                divisor: kappa.norm(),
                                threshold: dio.threshold(term.k),
                            });
                        }
                        report.secular = true;
                        let p = term.power + 1;
                        part.add(term.k, term.rho, p, i, j, c / p as f64);
                    }
                    Divisor::Near { divisor, threshold } => {
                        return Err(Error::Resonance {
                            left: i,
                            right: j,
                            k: term.k.to_vec(),
                            divisor,
                            threshold,
                        });
                    }
                    Divisor::Regular { divisor, threshold } => {
                        report.record(divisor, threshold);
                        let a = antiderivative_coefficients(kappa, term.power);
                        for (p, ap) in a.iter().enumerate() {
                            part.add(term.k, term.rho, p as u32, i, j, c * ap);
                        }
                        m0[(i, j)] += c * a[0];
                    }
                }
            }
        }
    }
    let particular = part.finish(eig)?;
    // [A0, M0] in the eigenbasis is (lambda_i - lambda_j) M0_ij
    let comm = ComplexMatrix::from_fn(n, |i, j| (eig.values[i] - eig.values[j]) * m0[(i, j)]);
    let mut f = mean;
    f -= &eig.from_eigenbasis(&comm);
    let m0 = eig.from_eigenbasis(&m0);
    let omega = particular.sub(&ExpPolyMatrix::constant(m0, rhs.basis().clone()))?;
    Ok((f, omega, report))
}

/// Quantum averaging: time-dependent `F_n(t)` collecting the resonant entries and `Omega_n`
/// from the double limiting average, corrected to vanish at `t = 0`.
pub fn qa_step(
    rhs: &ExpPolyMatrix,
    eig: &EigDecomposition,
    dio: &Diophantine,
) -> Result<(QaTerms, StepReport)> {
    let n = rhs.dim();
    let mut report = StepReport::default();
    let mut fb = EntryBuilder::new(n, rhs.basis().clone());
    let mut part = EntryBuilder::new(n, rhs.basis().clone());
    for term in rhs.terms() {
        let mu = rhs.exponent(term.k, term.rho);
        let ct = eig.to_eigenbasis(term.coeff);
        let scale = spectral_scale(eig, mu);
        for i in 0..n {
            for j in 0..n {
                let c = ct[(i, j)];
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let kappa = mu + eig.values[j] - eig.values[i];
                let existence = || Error::ExistenceCondition {
                    left: i,
                    right: j,
                    k: term.k.to_vec(),
                };
                match classify(kappa, term.k, dio, scale) {
                    Divisor::Exact => {
                        if term.power > 0 {
                            return Err(existence());
                        }
                        fb.add(term.k, term.rho, 0, i, j, c);
                    }
                    Divisor::Near { divisor, threshold } => {
                        return Err(Error::Resonance {
                            left: i,
                            right: j,
                            k: term.k.to_vec(),
                            divisor,
                            threshold,
                        });
                    }
                    Divisor::Regular { divisor, threshold } => {
                        if -kappa.re > EXACT_RESONANCE * scale {
                            return Err(existence());
                        }
                        report.record(divisor, threshold);
                        let a = antiderivative_coefficients(kappa, term.power);
                        for (p, ap) in a.iter().enumerate() {
                            part.add(term.k, term.rho, p as u32, i, j, c * ap);
                        }
                    }
                }
            }
        }
    }
    let f = fb.finish(eig)?;
    let particular = part.finish(eig)?;
    let homogeneous = ExpPolyMatrix::constant(particular.value_at_zero(), rhs.basis().clone())
        .conjugate_exp(eig, -1)?;
    let omega = particular.sub(&homogeneous)?;
    Ok((QaTerms { f, omega, particular }, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig, pauli};

    fn basis(w: &[f64]) -> Arc<SpectralBasis> {
        Arc::new(SpectralBasis::new(w).unwrap())
    }

    fn residual(omega: &ExpPolyMatrix, a0: &ComplexMatrix, target: &ExpPolyMatrix, t: f64) -> f64 {
        let om = omega.eval(t);
        let lhs = &omega.derivative().eval(t) + &om.commutator(a0);
        (&lhs - &target.eval(t)).max_abs()
    }

    #[test]
    fn magnus_and_fm_single_mode() {
        let b = basis(&[1.0]);
        let c = pauli::sigma1();
        let a = ExpPolyMatrix::mode(c.scale_real(0.5), &[1], 0.0, 0, b.clone())
            .unwrap()
            .add(&ExpPolyMatrix::mode(c.scale_real(0.5), &[-1], 0.0, 0, b.clone()).unwrap())
            .unwrap();
        let (f, om) = fm_step(&a).unwrap();
        assert!(f.is_zero());
        for &t in &[0.4, 2.0, 5.5] {
            assert!((&om.eval(t) - &c.scale_real(t.sin())).max_abs() < 1e-15);
        }
        let (f, om) = magnus_step(&ExpPolyMatrix::constant(c.clone(), b));
        assert!(f.is_zero());
        assert!((&om.eval(3.0) - &c.scale_real(3.0)).max_abs() < 1e-15);
    }

    #[test]
    fn ld_solved_mode_has_small_residual() {
        let a0 = ComplexMatrix::diagonal(&[Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)]);
        let e = eig(&a0).unwrap();
        let rhs = ExpPolyMatrix::mode(ComplexMatrix::unit(2, 0, 1), &[1], 0.0, 0, basis(&[1.0])).unwrap();
        let dio = Diophantine::for_rank(1);
        let (f, om, report) = ld_step(&rhs, &e, &dio, ResonancePolicy::Strict).unwrap();
        assert!(!report.secular);
        assert!(om.is_quasi_periodic());
        let target = rhs
            .sub(&ExpPolyMatrix::constant(f.clone(), rhs.basis().clone()))
            .unwrap();
        for i in 0..20 {
            let t = 0.37 * i as f64;
            assert!(residual(&om, &a0, &target, t) < 1e-12);
        }
        assert!(om.eval(0.0).max_abs() < 1e-15);
    }

    #[test]
    fn ld_exact_resonance_by_policy() {
        let a0 = ComplexMatrix::diagonal(&[Complex64::new(0.0, 0.5), Complex64::new(0.0, -0.5)]);
        let e = eig(&a0).unwrap();
        // kappa = i + lambda_2 - lambda_1 = 0
        let rhs = ExpPolyMatrix::mode(ComplexMatrix::unit(2, 0, 1), &[1], 0.0, 0, basis(&[1.0])).unwrap();
        let dio = Diophantine::for_rank(1);
        assert!(matches!(
            ld_step(&rhs, &e, &dio, ResonancePolicy::Strict),
            Err(Error::Resonance { left: 0, right: 1, .. })
        ));
        let (_, om, report) = ld_step(&rhs, &e, &dio, ResonancePolicy::Secular).unwrap();
        assert!(report.secular);
        assert_eq!(om.max_power(), 1);
        for &t in &[0.5, 3.0] {
            assert!(residual(&om, &a0, &rhs, t) < 1e-13);
        }
    }

    #[test]
    fn qa_resonant_mode_goes_to_f() {
        let a0 = pauli::sigma3().scale(Complex64::new(0.0, -0.5));
        let e = eig(&a0).unwrap();
        let b = basis(&[1.0]);
        let c = pauli::sigma1().scale(Complex64::new(0.0, -0.5));
        let rhs = ExpPolyMatrix::mode(c.clone(), &[1], 0.0, 0, b.clone())
            .unwrap()
            .add(&ExpPolyMatrix::mode(c, &[-1], 0.0, 0, b).unwrap())
            .unwrap();
        let dio = Diophantine::for_rank(1);
        let (q, _) = qa_step(&rhs, &e, &dio).unwrap();
        assert!(!q.f.is_empty());
        let target = rhs.sub(&q.f).unwrap();
        for i in 0..20 {
            let t = 0.61 * i as f64;
            let df = &q.f.derivative().eval(t) + &q.f.eval(t).commutator(&a0);
            assert!(df.max_abs() < 1e-13);
            assert!(residual(&q.omega, &a0, &target, t) < 1e-13);
        }
        assert!(q.omega.eval(0.0).max_abs() < 1e-15);
    }

    #[test]
    fn rm_reduces_to_magnus_when_a0_vanishes() {
        let e = eig(&ComplexMatrix::zeros(2)).unwrap();
        let rhs = ExpPolyMatrix::mode(pauli::sigma2(), &[1], 0.0, 1, basis(&[2.0])).unwrap();
        let om = rm_step(&rhs, &e).unwrap();
        let (_, mag) = magnus_step(&rhs);
        for &t in &[0.3, 1.9] {
            assert!((&om.eval(t) - &mag.eval(t)).max_abs() < 1e-15);
        }
    }
}
