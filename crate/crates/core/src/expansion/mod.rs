//! Exponential perturbative expansions built on one recursion.
//!
//! Every method writes the solution of `x' = A(t) x` as `x = exp(Omega(t)) X(t)`
//! with `X' = F(t) X`, expands `Omega = sum eps^n Omega_n` and `F = sum eps^n F_n`,
//! and differs only in how each order splits its right-hand side between the two.

use core::fmt;
use core::str::FromStr;

use crate::error::Error;
use crate::linalg::Diophantine;

pub mod direct;
pub mod dyson;
pub mod horizon;
pub mod recursion;
pub mod series;
pub mod steps;
pub mod system;

pub use direct::magnus_direct_term;
pub use dyson::{dyson_terms, DysonTerms};
pub use horizon::{convergence_horizon, HorizonBound};
pub use recursion::{expand, expand_with, MAX_ORDER};
pub use series::{Diagnostics, ExpansionSeries, Picture};
pub use steps::{fm_step, ld_step, magnus_step, qa_step, rm_step, QaTerms, StepReport};
pub use system::SystemSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Magnus,
    FloquetMagnus,
    RemovePerturbation,
    StandardPerturbation,
    LieDeprit,
    QuantumAveraging,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Magnus,
        Method::FloquetMagnus,
        Method::RemovePerturbation,
        Method::StandardPerturbation,
        Method::LieDeprit,
        Method::QuantumAveraging,
    ];

    /// Short command-line tag.
    pub fn tag(self) -> &'static str {
        match self {
            Method::Magnus => "magnus",
            Method::FloquetMagnus => "fm",
            Method::RemovePerturbation => "rm",
            Method::StandardPerturbation => "sp",
            Method::LieDeprit => "ld",
            Method::QuantumAveraging => "qa",
        }
    }

    /// True for methods whose propagator is an exponential (unitary for skew-Hermitian input).
    pub fn is_exponential(self) -> bool {
        self != Method::StandardPerturbation
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let lower = s.to_ascii_lowercase();
        let m = match lower.as_str() {
            "magnus" | "m" => Method::Magnus,
            "fm" | "floquet-magnus" | "floquetmagnus" => Method::FloquetMagnus,
            "rm" | "remove-perturbation" | "removeperturbation" => Method::RemovePerturbation,
            "sp" | "dyson" | "standard" | "standard-perturbation" => Method::StandardPerturbation,
            "ld" | "lie-deprit" | "liedeprit" => Method::LieDeprit,
            "qa" | "quantum-averaging" | "averaging" => Method::QuantumAveraging,
            _ => return Err(Error::InvalidInput(alloc::format!("unknown method `{s}`"))),
        };
        Ok(m)
    }
}

/// Treatment of exactly resonant modes in the Lie–Deprit homological solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ResonancePolicy {
    /// Integrate resonant entries by the power rule, producing secular terms.
    #[default]
    Secular,
    /// Raise a resonance error.
    Strict,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExpandOptions {
    pub resonance: ResonancePolicy,
    /// Overrides the small-divisor bound derived from the system's basis.
    pub diophantine: Option<Diophantine>,
}
