//! Built-in model systems.

use alloc::sync::Arc;
use alloc::vec;
use core::f64::consts::{PI, SQRT_2};
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exp_poly::{ExpPolyMatrix, SpectralBasis};
use crate::expansion::SystemSpec;
use crate::linalg::{pauli, ComplexMatrix};
use crate::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// Three-level lambda system driven by `f(t) = beta exp(i omega t)`.
    ThreeLambdaPeriodic,
    /// Three-level lambda system driven by `f(t) = beta (exp(i omega t) + exp(i sqrt2 omega t))`.
    ThreeLambdaQp,
    /// Two-level system `H = (omega0/2) sigma3 + 2b cos(omega t) sigma1`.
    BlochSiegert,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::ThreeLambdaPeriodic, Builtin::ThreeLambdaQp, Builtin::BlochSiegert];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::ThreeLambdaPeriodic => "three-lambda-periodic",
            Builtin::ThreeLambdaQp => "three-lambda-qp",
            Builtin::BlochSiegert => "bloch-siegert",
        }
    }

    /// Default driving frequency.
    pub fn default_omega(self) -> f64 {
        match self {
            Builtin::ThreeLambdaPeriodic => 10.0 / (1.0 + SQRT_2 / 2.0).sqrt(),
            Builtin::ThreeLambdaQp => 12.0,
            Builtin::BlochSiegert => 1.0,
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(alloc::format!("unknown system `{s}`")))
    }
}

/// Parameters of the built-in systems; `None` selects the default.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SystemParams {
    pub omega: Option<f64>,
    /// Second base frequency of the quasi-periodic three-lambda drive, default `sqrt2 omega`.
    pub omega2: Option<f64>,
    /// Bloch–Siegert level splitting, default 1.
    pub omega0: Option<f64>,
    /// Three-lambda coupling amplitude, default 1.
    pub beta: Option<f64>,
    /// Bloch–Siegert driving amplitude, `epsilon = 2b`; default 0.1.
    pub b: Option<f64>,
    /// Overrides `epsilon` directly (Bloch–Siegert only).
    pub epsilon: Option<f64>,
    /// Three-lambda only: measure time in units of `1/omega`.
    pub scaled_time: bool,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidInput(alloc::format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidInput(alloc::format!("{name} must be finite, got {v}")))
    }
}

/// Builds a named system.
pub fn builtin_system(name: &str, params: &SystemParams) -> Result<SystemSpec> {
    let which: Builtin = name.parse()?;
    build(which, params)
}

/// Builds a system from its tag.
pub fn build(which: Builtin, params: &SystemParams) -> Result<SystemSpec> {
    let omega = positive("omega", params.omega.unwrap_or(which.default_omega()))?;
    match which {
        Builtin::ThreeLambdaPeriodic | Builtin::ThreeLambdaQp => {
            if params.omega0.is_some() || params.b.is_some() || params.epsilon.is_some() {
                return Err(Error::invalid("three-lambda systems take omega and beta only"));
            }
            let beta = finite("beta", params.beta.unwrap_or(1.0))?;
            let second = match (which, params.omega2) {
                (Builtin::ThreeLambdaQp, Some(w2)) => Some(positive("omega2", w2)? / omega),
                (Builtin::ThreeLambdaQp, None) => Some(SQRT_2),
                (_, Some(_)) => return Err(Error::invalid("omega2 applies to three-lambda-qp only")),
                (_, None) => None,
            };
            three_lambda(second, omega, beta, params.scaled_time)
        }
        Builtin::BlochSiegert => {
            if params.beta.is_some() || params.omega2.is_some() || params.scaled_time {
                return Err(Error::invalid("bloch-siegert takes omega, omega0 and b (or epsilon)"));
            }
            let omega0 = finite("omega0", params.omega0.unwrap_or(1.0))?;
            let epsilon = match (params.b, params.epsilon) {
                (Some(b), Some(e)) if (2.0 * b - e).abs() > 1e-15 * e.abs().max(1.0) => {
                    return Err(Error::invalid("b and epsilon disagree (epsilon = 2b)"))
                }
                (_, Some(e)) => e,
                (Some(b), None) => 2.0 * b,
                (None, None) => 0.2,
            };
            bloch_siegert(omega0, omega, epsilon)
        }
    }
}

/// `A = -i H` with `H = f(t) |3><1| + f(t) |3><2| + h.c.`, `A0 = 0`, `eps = 1`.
///
/// `second` is the ratio of the second drive frequency to `omega`, if any.
fn three_lambda(second: Option<f64>, omega: f64, beta: f64, scaled: bool) -> Result<SystemSpec> {
    let unit = if scaled { 1.0 } else { omega };
    let quasi_periodic = second.is_some();
    let (freqs, modes): (alloc::vec::Vec<f64>, alloc::vec::Vec<[i32; 2]>) = if let Some(ratio) = second {
        (vec![unit, ratio * unit], vec![[1, 0], [0, 1]])
    } else {
        (vec![unit], vec![[1, 0]])
    };
    let basis = Arc::new(SpectralBasis::new(&freqs)?);
    let amp = if scaled { beta / omega } else { beta };
    let minus_i = Complex64::new(0.0, -amp);
    let mut lower = ComplexMatrix::zeros(3);
    lower[(2, 0)] = minus_i;
    lower[(2, 1)] = minus_i;
    let upper = lower.transpose();
    let mut a = ExpPolyMatrix::zero(3, basis.clone());
    for m in &modes {
        let k = &m[..basis.rank()];
        let neg: alloc::vec::Vec<i32> = k.iter().map(|x| -x).collect();
        a.add_term(k, 0.0, 0, &lower)?;
        a.add_term(&neg, 0.0, 0, &upper)?;
    }
    let sys = SystemSpec::new(ComplexMatrix::zeros(3), vec![a], 1.0)?.with_skew_hermitian(true)?;
    if quasi_periodic {
        Ok(sys)
    } else {
        sys.with_period(2.0 * PI / unit)
    }
}

/// `A0 = -i (omega0/2) sigma3`, `A1 = -i cos(omega t) sigma1`.
fn bloch_siegert(omega0: f64, omega: f64, epsilon: f64) -> Result<SystemSpec> {
    let basis = Arc::new(SpectralBasis::new(&[omega])?);
    let a0 = pauli::sigma3().scale(Complex64::new(0.0, -omega0 / 2.0));
    let half = pauli::sigma1().scale(Complex64::new(0.0, -0.5));
    let mut a1 = ExpPolyMatrix::zero(2, basis);
    a1.add_term(&[1], 0.0, 0, &half)?;
    a1.add_term(&[-1], 0.0, 0, &half)?;
    SystemSpec::new(a0, vec![a1], epsilon)?
        .with_skew_hermitian(true)?
        .with_period(2.0 * PI / omega)
}
