#![allow(dead_code)]

use std::sync::Arc;

use pertexp_core::exp_poly::{ExpPolyMatrix, SpectralBasis};
use pertexp_core::expansion::SystemSpec;
use pertexp_core::linalg::ComplexMatrix;
use pertexp_core::systems::{builtin_system, SystemParams};
use pertexp_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(dim: usize, scale: f64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
}

pub fn random_skew(dim: usize, scale: f64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    random_matrix(dim, scale, rng).skew_hermitian_part()
}

/// Quasi-periodic `sum_k C_k exp(i k.omega t)` over `|k_j| <= 1`.
pub fn random_quasi_periodic(dim: usize, freqs: &[f64], scale: f64, rng: &mut ChaCha8Rng) -> ExpPolyMatrix {
    let basis = Arc::new(SpectralBasis::new(freqs).unwrap());
    let mut a = ExpPolyMatrix::zero(dim, basis);
    let r = freqs.len();
    for code in 0..3usize.pow(r as u32) {
        let k: Vec<i32> = (0..r).map(|j| ((code / 3usize.pow(j as u32)) % 3) as i32 - 1).collect();
        a.add_term(&k, 0.0, 0, &random_matrix(dim, scale, rng)).unwrap();
    }
    a
}

pub fn bloch_siegert(epsilon: f64) -> SystemSpec {
    builtin_system(
        "bloch-siegert",
        &SystemParams {
            epsilon: Some(epsilon),
            ..Default::default()
        },
    )
    .unwrap()
}

pub fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

pub fn close(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).max_abs()
}

/// `int_0^t f` by composite Gauss–Legendre on `panels` panels.
pub fn quad(f: impl Fn(f64) -> ComplexMatrix, a: f64, b: f64, panels: usize, dim: usize) -> ComplexMatrix {
    let (x, w) = pertexp_core::quadrature::gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut acc = ComplexMatrix::zeros(dim);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            acc.axpy(Complex64::new(0.5 * h * wi, 0.0), &f(lo + 0.5 * h * (1.0 + xi)));
        }
    }
    acc
}
