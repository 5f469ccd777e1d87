mod common;

use std::sync::Arc;

use common::*;
use pertexp_core::exp_poly::{ExpPolyMatrix, SpectralBasis};
use pertexp_core::expansion::{convergence_horizon, expand, HorizonBound, Method, SystemSpec};
use pertexp_core::linalg::{eig, expm, pauli, spectral_norm, ComplexMatrix};
use pertexp_core::propagator::{assemble, propagate, transition_probability, unitarity_defect, AssemblyMode};
use pertexp_core::reference::{error_curve, max_error, reference_propagate, reference_propagate_fn, DEFAULT_TOL};
use pertexp_core::systems::{builtin_system, SystemParams};
use pertexp_core::{Complex64, Error};
use rand::Rng;

#[test]
fn identity_at_time_zero_for_every_method() {
    let sys = bloch_siegert(0.7);
    for method in Method::ALL {
        let series = expand(&sys, method, 3).unwrap();
        for mode in [AssemblyMode::Full, AssemblyMode::EffectiveOnly, AssemblyMode::GeneratorOnly] {
            let u = assemble(&series, 0.0, 0.7, mode).unwrap();
            assert!(close(&u, &ComplexMatrix::identity(2)) < 1e-13, "{method} {mode:?}");
        }
    }
}

#[test]
fn magnus_on_constant_generator_is_exact() {
    let mut rng = rng(8);
    let a = random_matrix(3, 0.6, &mut rng);
    let basis = Arc::new(SpectralBasis::empty());
    let sys = SystemSpec::new(ComplexMatrix::zeros(3), vec![ExpPolyMatrix::constant(a.clone(), basis)], 1.0).unwrap();
    let series = expand(&sys, Method::Magnus, 3).unwrap();
    for (t, eps) in [(0.7, 0.5), (2.0, 1.3)] {
        let u = assemble(&series, t, eps, AssemblyMode::Full).unwrap();
        let exact = expm(&a.scale_real(eps * t)).unwrap();
        assert!(close(&u, &exact) < 1e-12);
    }
}

#[test]
fn exponential_methods_are_unitary_on_skew_systems() {
    let times = grid(0.0, 40.0, 81);
    for eps in [0.2, 1.0, 1.5] {
        let sys = bloch_siegert(eps);
        for method in Method::ALL.into_iter().filter(|m| m.is_exponential()) {
            for order in [3, 7] {
                let series = expand(&sys, method, order).unwrap();
                let res = propagate(&series, &times, eps, AssemblyMode::Full, (0, 1)).unwrap();
                assert!(res.max_defect() < 1e-11, "{method} N={order} eps={eps}: {:e}", res.max_defect());
                assert!(res.probabilities.iter().all(|&p| (0.0..=1.0 + 1e-9).contains(&p)));
            }
        }
    }
}

#[test]
fn standard_perturbation_is_not_unitary() {
    let sys = bloch_siegert(1.0);
    let series = expand(&sys, Method::StandardPerturbation, 3).unwrap();
    let u = assemble(&series, 5.0, 1.0, AssemblyMode::Full).unwrap();
    assert!(unitarity_defect(&u) > 1e-3);
}

#[test]
fn floquet_envelope_is_a_one_parameter_group() {
    let sys = bloch_siegert(0.4);
    let series = expand(&sys, Method::FloquetMagnus, 3).unwrap();
    // e^{t F} carries the interaction-picture lift; strip it to see the group
    let f = series.f_sum(0.0, 0.4);
    let lift = |t: f64| expm(&sys.a0().scale_real(t)).unwrap();
    let phases = |t: f64| {
        let env = lift(-t).matmul(&assemble(&series, t, 0.4, AssemblyMode::EffectiveOnly).unwrap());
        assert!(close(&env, &expm(&f.scale_real(t)).unwrap()) < 1e-12);
        let mut v: Vec<f64> = eig(&env).unwrap().values.iter().map(|z| z.arg()).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (p1, p2) = (phases(0.3), phases(0.6));
    for (a, b) in p1.iter().zip(&p2) {
        assert!((2.0 * a - b).abs() < 1e-12);
    }
}

#[test]
fn transition_probability_convention() {
    let u = pauli::sigma1();
    assert_eq!(transition_probability(&u, 0, 1).unwrap(), 1.0);
    assert!(matches!(transition_probability(&u, 0, 5), Err(Error::IndexOutOfRange { .. })));
}

#[test]
fn reference_matches_matrix_exponential() {
    let mut rng = rng(21);
    let a = random_skew(3, 1.0, &mut rng);
    let tol = 1e-10;
    let res = reference_propagate_fn(|_| a.clone(), 3, &[0.0, 5.0, 10.0], tol, (0, 1)).unwrap();
    let exact = expm(&a.scale_real(10.0)).unwrap();
    assert!(close(&res.samples[2], &exact) < 10.0 * tol);
    assert!(close(&res.samples[0], &ComplexMatrix::identity(3)) == 0.0);
}

#[test]
fn reference_is_self_consistent_under_tolerance_halving() {
    let sys = bloch_siegert(0.2);
    let times = grid(0.0, 60.0, 121);
    let a = reference_propagate(&sys, &times, 1e-10, (0, 1)).unwrap();
    let b = reference_propagate(&sys, &times, 0.5e-10, (0, 1)).unwrap();
    assert!(max_error(&error_curve(&a, &b, (0, 1)).unwrap()) < 1e-9);
    // Rabi flopping at resonance reaches near-complete transfer
    let peak = a.probabilities.iter().copied().fold(0.0, f64::max);
    assert!(peak > 0.95, "{peak}");
}

#[test]
fn reference_unitarity_drift_is_small() {
    let sys = builtin_system("three-lambda-periodic", &SystemParams::default()).unwrap();
    let omega = 10.0 / (1.0 + std::f64::consts::SQRT_2 / 2.0).sqrt();
    let times = grid(0.0, 400.0 / omega, 101);
    let res = reference_propagate(&sys, &times, DEFAULT_TOL, (0, 1)).unwrap();
    assert!(res.max_defect() < 100.0 * DEFAULT_TOL, "{:e}", res.max_defect());
}

#[test]
fn reference_error_scales_with_tolerance() {
    let mut rng = rng(2);
    let a = random_skew(2, 2.0, &mut rng);
    let exact = expm(&a.scale_real(20.0)).unwrap();
    let err = |tol: f64| {
        let r = reference_propagate_fn(|_| a.clone(), 2, &[20.0], tol, (0, 1)).unwrap();
        close(&r.samples[0], &exact)
    };
    let (coarse, fine) = (err(1e-7), err(1e-8));
    let ratio = coarse / fine;
    assert!(ratio > 1.0 && ratio < 100.0, "{ratio}");
}

#[test]
fn reference_rejects_bad_inputs() {
    let sys = bloch_siegert(0.2);
    assert!(reference_propagate(&sys, &[0.0, 1.0], 1e-3, (0, 1)).is_err());
    assert!(reference_propagate(&sys, &[1.0, 0.5], 1e-10, (0, 1)).is_err());
    let a = reference_propagate(&sys, &[0.0, 1.0], 1e-10, (0, 1)).unwrap();
    let b = reference_propagate(&sys, &[0.0, 2.0], 1e-10, (0, 1)).unwrap();
    assert_eq!(error_curve(&a, &b, (0, 1)).unwrap_err(), Error::GridMismatch);
    assert!(error_curve(&a, &a, (0, 1)).unwrap().iter().all(|&(_, e)| e == 0.0));
}

#[test]
fn expansions_approach_the_reference() {
    let sys = bloch_siegert(0.1);
    let times = grid(0.0, 10.0, 41);
    let reference = reference_propagate(&sys, &times, DEFAULT_TOL, (0, 1)).unwrap();
    for method in Method::ALL {
        let series = expand(&sys, method, 4).unwrap();
        let approx = propagate(&series, &times, 0.1, AssemblyMode::Full, (0, 1)).unwrap();
        let e = max_error(&error_curve(&approx, &reference, (0, 1)).unwrap());
        assert!(e < 1e-3, "{method}: {e:e}");
    }
}

#[test]
fn horizons() {
    for (eps, expected) in [(0.2, 6.056), (1.0, 3.608)] {
        let a = bloch_siegert(eps).generator(eps).unwrap();
        let t = convergence_horizon(&a, HorizonBound::Magnus);
        assert!((t - expected).abs() < 1e-3, "{t}");
    }
    let qp = builtin_system("three-lambda-qp", &SystemParams::default()).unwrap();
    let a = qp.generator(1.0).unwrap();
    assert!((convergence_horizon(&a, HorizonBound::Magnus) - 1.6117).abs() < 1e-3);
    assert!((convergence_horizon(&a, HorizonBound::FloquetMagnus) - 0.074).abs() < 1e-3);
}

#[test]
fn quasi_periodic_norm_identity() {
    let qp = builtin_system("three-lambda-qp", &SystemParams::default()).unwrap();
    let mut rng = rng(4);
    for _ in 0..50 {
        let t: f64 = rng.gen_range(0.0..20.0);
        let expected = 8f64.sqrt() * ((2f64.sqrt() - 1.0) * 12.0 * t / 2.0).cos().abs();
        assert!((spectral_norm(&qp.eval(t)) - expected).abs() < 1e-10);
    }
}

#[test]
fn bloch_siegert_is_skew_hermitian_at_random_times() {
    let sys = builtin_system("bloch-siegert", &SystemParams::default()).unwrap();
    let mut rng = rng(9);
    for _ in 0..20 {
        let a = sys.eval(rng.gen_range(-50.0..50.0));
        assert!(close(&a, &a.adjoint().scale(Complex64::new(-1.0, 0.0))) < 1e-15);
    }
}
