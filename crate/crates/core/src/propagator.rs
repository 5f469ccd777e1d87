//! Numerical propagators assembled from an [`ExpansionSeries`].

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expansion::{ExpansionSeries, Method, Picture};
use crate::linalg::{expm, expm_skew_hermitian, ComplexMatrix};
use crate::Complex64;

pub use crate::linalg::unitarity_defect;

/// Which factor of `U(t) = exp(Omega(t)) X(t)` to build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AssemblyMode {
    /// `exp(Omega) X`.
    #[default]
    Full,
    /// The envelope `X(t)` alone.
    EffectiveOnly,
    /// `exp(Omega)` alone.
    GeneratorOnly,
}

/// Sampled propagator with one transition probability per sample.
#[derive(Clone, Debug)]
pub struct PropagationResult {
    pub times: Vec<f64>,
    pub samples: Vec<ComplexMatrix>,
    /// `(i, j)`, 0-based.
    pub observable: (usize, usize),
    /// `|U_ij(t)|^2` per sample.
    pub probabilities: Vec<f64>,
    pub defects: Vec<f64>,
    pub picture: Picture,
}

impl PropagationResult {
    /// Validates the grid and indices and computes observables and unitarity defects.
    pub fn from_samples(
        times: Vec<f64>,
        samples: Vec<ComplexMatrix>,
        observable: (usize, usize),
        picture: Picture,
    ) -> Result<Self> {
        check_grid(&times)?;
        if times.len() != samples.len() {
            return Err(Error::invalid("one sample per grid point is required"));
        }
        let probabilities = samples
            .iter()
            .map(|u| transition_probability(u, observable.0, observable.1))
            .collect::<Result<Vec<_>>>()?;
        let defects = samples.iter().map(unitarity_defect).collect();
        Ok(PropagationResult {
            times,
            samples,
            observable,
            probabilities,
            defects,
            picture,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_defect(&self) -> f64 {
        self.defects.iter().copied().fold(0.0, f64::max)
    }
}

/// Errors unless the grid is non-empty, finite and strictly increasing.
pub fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid("empty time grid"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("time grid has non-finite entries"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("time grid must be strictly increasing"));
    }
    Ok(())
}

/// `|U_ij|^2`, 0-based.
pub fn transition_probability(u: &ComplexMatrix, i: usize, j: usize) -> Result<f64> {
    let dim = u.dim();
    for index in [i, j] {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
    }
    Ok(u[(i, j)].norm_sqr())
}

fn exp(m: &ComplexMatrix, skew: bool) -> Result<ComplexMatrix> {
    if skew {
        expm_skew_hermitian(m)
    } else {
        expm(m)
    }
}

fn series_sum(terms: &[crate::exp_poly::ExpPolyMatrix], dim: usize, t: f64, epsilon: f64) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(dim);
    let mut p = 1.0;
    for term in terms {
        p *= epsilon;
        out.axpy(Complex64::new(p, 0.0), &term.eval(t));
    }
    out
}

fn envelope(series: &ExpansionSeries, t: f64, epsilon: f64, skew: bool) -> Result<ComplexMatrix> {
    let dim = series.a0().dim();
    let a0t = series.a0().scale_real(t);
    match series.method() {
        Method::Magnus => Ok(ComplexMatrix::identity(dim)),
        Method::FloquetMagnus | Method::LieDeprit => exp(&series.f_sum(0.0, epsilon).scale_real(t), skew),
        Method::RemovePerturbation | Method::StandardPerturbation => exp(&a0t, skew),
        Method::QuantumAveraging => {
            let shifted = series.f_sum(0.0, epsilon) - series.a0();
            Ok(exp(&a0t, skew)?.matmul(&exp(&shifted.scale_real(t), skew)?))
        }
    }
}

/// Propagator of the working frame, before any interaction-picture lift is undone.
fn assemble_working(series: &ExpansionSeries, t: f64, epsilon: f64, mode: AssemblyMode) -> Result<ComplexMatrix> {
    let dim = series.a0().dim();
    let skew = series.is_skew_hermitian();
    if series.method() == Method::StandardPerturbation {
        let id = ComplexMatrix::identity(dim);
        return match mode {
            AssemblyMode::Full => {
                let g = &id + &series_sum(series.dyson_terms(), dim, t, epsilon);
                Ok(envelope(series, t, epsilon, skew)?.matmul(&g))
            }
            AssemblyMode::EffectiveOnly => envelope(series, t, epsilon, skew),
            AssemblyMode::GeneratorOnly => Ok(&id + &series_sum(series.omegas(), dim, t, epsilon)),
        };
    }
    let generator = || exp(&series_sum(series.omegas(), dim, t, epsilon), skew);
    match mode {
        AssemblyMode::Full => Ok(generator()?.matmul(&envelope(series, t, epsilon, skew)?)),
        AssemblyMode::EffectiveOnly => envelope(series, t, epsilon, skew),
        AssemblyMode::GeneratorOnly => generator(),
    }
}

/// Approximate propagator `U(t)` at perturbation strength `epsilon`.
///
/// The series is summed in `epsilon` before exponentiation. Skew-Hermitian systems are
/// exponentiated through their skew-Hermitian part, so exponential methods return a
/// unitary matrix to rounding.
pub fn assemble(series: &ExpansionSeries, t: f64, epsilon: f64, mode: AssemblyMode) -> Result<ComplexMatrix> {
    if !t.is_finite() || !epsilon.is_finite() {
        return Err(Error::invalid("time and epsilon must be finite"));
    }
    let u = assemble_working(series, t, epsilon, mode)?;
    match series.picture() {
        Picture::Direct => Ok(u),
        Picture::Interaction { a0 } => Ok(exp(&a0.scale_real(t), series.is_skew_hermitian())?.matmul(&u)),
    }
}

/// Samples [`assemble`] on a strictly increasing grid.
pub fn propagate(
    series: &ExpansionSeries,
    times: &[f64],
    epsilon: f64,
    mode: AssemblyMode,
    observable: (usize, usize),
) -> Result<PropagationResult> {
    check_grid(times)?;
    let samples = times
        .iter()
        .map(|&t| assemble(series, t, epsilon, mode))
        .collect::<Result<Vec<_>>>()?;
    PropagationResult::from_samples(times.to_vec(), samples, observable, series.picture().clone())
}
