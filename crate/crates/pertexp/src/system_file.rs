//! JSON description of a custom system.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "frequencies": [1.0],
//!   "A0": {"re": [[0, 0], [0, 0]], "im": [[-0.5, 0], [0, 0.5]]},
//!   "terms": [{"order": 1, "modes": [
//!     {"k": [1], "rho": 0.0, "power": 0, "re": [[0, 0], [0, 0]], "im": [[0, -0.5], [-0.5, 0]]}
//!   ]}],
//!   "skew_hermitian": true,
//!   "period": 6.283185307179586
//! }
//! ```
//!
//! Each mode contributes `(re + i im) t^power exp((rho + i k.frequencies) t)` to `A_order`.

use std::path::Path;
use std::sync::Arc;

use pertexp_core::exp_poly::{ExpPolyMatrix, SpectralBasis};
use pertexp_core::expansion::SystemSpec;
use pertexp_core::linalg::ComplexMatrix;
use pertexp_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixParts {
    pub re: Vec<Vec<f64>>,
    /// Defaults to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub k: Vec<i32>,
    #[serde(default)]
    pub rho: f64,
    #[serde(default)]
    pub power: u32,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub order: usize,
    pub modes: Vec<ModeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub dim: usize,
    #[serde(default)]
    pub frequencies: Vec<f64>,
    #[serde(rename = "A0")]
    pub a0: MatrixParts,
    #[serde(default)]
    pub terms: Vec<TermSpec>,
    #[serde(default)]
    pub skew_hermitian: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    /// Perturbation strength, default 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

fn matrix(dim: usize, re: &[Vec<f64>], im: Option<&Vec<Vec<f64>>>, what: &str) -> CliResult<ComplexMatrix> {
    let zeros;
    let im = match im {
        Some(im) => im.as_slice(),
        None => {
            zeros = vec![vec![0.0; dim]; dim];
            zeros.as_slice()
        }
    };
    let m = ComplexMatrix::from_parts(re, im).map_err(|e| CliError::config(format!("{what}: {e}")))?;
    if m.dim() != dim {
        return Err(CliError::config(format!("{what}: expected a {dim}x{dim} matrix, found {0}x{0}", m.dim())));
    }
    if !m.is_finite() {
        return Err(CliError::config(format!("{what}: non-finite entries")));
    }
    Ok(m)
}

fn parts(m: &ComplexMatrix) -> (Vec<Vec<f64>>, Option<Vec<Vec<f64>>>) {
    let im = m.imag_parts();
    let nonzero = im.iter().flatten().any(|&x| x != 0.0);
    (m.real_parts(), nonzero.then_some(im))
}

impl SystemFile {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system files serialize")
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|source| CliError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Builds the system; `hamiltonian` reads every matrix as `H` and stores `A = -i H`.
    pub fn to_system(&self, hamiltonian: bool) -> CliResult<SystemSpec> {
        let dim = self.dim;
        if dim == 0 {
            return Err(CliError::config("dim must be positive"));
        }
        let convert = |m: ComplexMatrix| {
            if hamiltonian {
                m.scale(Complex64::new(0.0, -1.0))
            } else {
                m
            }
        };
        let basis = Arc::new(SpectralBasis::new(&self.frequencies)?);
        let a0 = convert(matrix(dim, &self.a0.re, self.a0.im.as_ref(), "A0")?);
        let max_order = self.terms.iter().map(|t| t.order).max().unwrap_or(0);
        let mut terms = vec![ExpPolyMatrix::zero(dim, basis.clone()); max_order];
        let mut seen = vec![false; max_order];
        for term in &self.terms {
            if term.order == 0 {
                return Err(CliError::config("term orders start at 1"));
            }
            if std::mem::replace(&mut seen[term.order - 1], true) {
                return Err(CliError::config(format!("order {} appears twice", term.order)));
            }
            for (i, mode) in term.modes.iter().enumerate() {
                let what = format!("order {} mode {}", term.order, i + 1);
                if mode.k.len() != basis.rank() {
                    return Err(CliError::config(format!(
                        "{what}: k has {} entries for {} frequencies",
                        mode.k.len(),
                        basis.rank()
                    )));
                }
                if !mode.rho.is_finite() {
                    return Err(CliError::config(format!("{what}: rho must be finite")));
                }
                let c = convert(matrix(dim, &mode.re, mode.im.as_ref(), &what)?);
                terms[term.order - 1].add_term(&mode.k, mode.rho, mode.power, &c)?;
            }
        }
        let epsilon = self.epsilon.unwrap_or(1.0);
        let mut sys = SystemSpec::new(a0, terms, epsilon)?.with_skew_hermitian(self.skew_hermitian)?;
        if let Some(p) = self.period {
            sys = sys.with_period(p)?;
        }
        Ok(sys)
    }

    /// Serializes a system; its basis frequencies become `frequencies`.
    pub fn from_system(sys: &SystemSpec) -> Self {
        let (re, im) = parts(sys.a0());
        let terms = sys
            .terms()
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_empty())
            .map(|(n, a)| TermSpec {
                order: n + 1,
                modes: a
                    .terms()
                    .map(|t| {
                        let (re, im) = parts(t.coeff);
                        ModeSpec {
                            k: t.k.to_vec(),
                            rho: t.rho,
                            power: t.power,
                            re,
                            im,
                        }
                    })
                    .collect(),
            })
            .collect();
        SystemFile {
            dim: sys.dim(),
            frequencies: sys.basis().frequencies().to_vec(),
            a0: MatrixParts { re, im },
            terms,
            skew_hermitian: sys.is_skew_hermitian(),
            period: sys.period(),
            epsilon: Some(sys.epsilon()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BS: &str = r#"{
        "dim": 2,
        "frequencies": [1.0],
        "A0": {"re": [[0.5, 0], [0, -0.5]]},
        "terms": [{"order": 1, "modes": [
            {"k": [1], "re": [[0, 0.5], [0.5, 0]]},
            {"k": [-1], "re": [[0, 0.5], [0.5, 0]]}
        ]}],
        "skew_hermitian": true,
        "period": 6.283185307179586
    }"#;

    #[test]
    fn hamiltonian_flag_multiplies_by_minus_i() {
        let file = SystemFile::from_json(BS).unwrap();
        let sys = file.to_system(true).unwrap();
        let a = sys.eval(0.0);
        assert_eq!(a[(0, 0)], Complex64::new(0.0, -0.5));
        assert_eq!(a[(0, 1)], Complex64::new(0.0, -1.0));
        // read as A directly the matrices are Hermitian, not skew
        assert!(file.to_system(false).is_err());
    }

    #[test]
    fn rejects_inconsistent_files() {
        let mut file = SystemFile::from_json(BS).unwrap();
        file.terms[0].modes[0].k = vec![1, 0];
        assert!(matches!(file.to_system(true), Err(CliError::Config(_))));
        let mut file = SystemFile::from_json(BS).unwrap();
        file.a0.re.pop();
        assert!(matches!(file.to_system(true), Err(CliError::Config(_))));
        assert!(SystemFile::from_json(r#"{"dim": 2, "A0": {"re": []}, "bogus": 1}"#).is_err());
    }
}
