use std::path::PathBuf;

use pertexp_core::expansion::{Method, ResonancePolicy, SystemSpec, MAX_ORDER};
use pertexp_core::propagator::AssemblyMode;
use pertexp_core::reference::{DEFAULT_TOL, TOL_RANGE};
use pertexp_core::systems::{build, Builtin, SystemParams};

use crate::error::{CliError, CliResult};
use crate::system_file::SystemFile;

/// Where the system comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemSource {
    Builtin(Builtin),
    File(PathBuf),
}

impl SystemSource {
    /// A built-in name, otherwise a path to a JSON system file.
    pub fn parse(s: &str) -> Self {
        match s.parse::<Builtin>() {
            Ok(b) => SystemSource::Builtin(b),
            Err(_) => SystemSource::File(PathBuf::from(s)),
        }
    }
}

/// Everything a command needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub system: SystemSource,
    pub method: Method,
    pub order: usize,
    pub epsilon: Option<f64>,
    /// Built-in system parameters (`epsilon` is taken from the field above).
    pub params: SystemParams,
    /// File systems only: read matrices as `H` and use `A = -i H`.
    pub hamiltonian: bool,
    pub t_max: f64,
    pub samples: usize,
    /// `(i, j)`, 1-based.
    pub observable: (usize, usize),
    pub output: Option<PathBuf>,
    pub tol: f64,
    pub mode: AssemblyMode,
    pub resonance: ResonancePolicy,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SystemSource::Builtin(Builtin::BlochSiegert),
            method: Method::FloquetMagnus,
            order: 3,
            epsilon: None,
            params: SystemParams::default(),
            hamiltonian: false,
            t_max: 10.0,
            samples: 201,
            observable: (1, 2),
            output: None,
            tol: DEFAULT_TOL,
            mode: AssemblyMode::Full,
            resonance: ResonancePolicy::Secular,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.order == 0 || self.order > MAX_ORDER {
            return Err(CliError::config(format!("order must be in 1..={MAX_ORDER}, got {}", self.order)));
        }
        if self.samples < 2 {
            return Err(CliError::config("samples must be at least 2"));
        }
        if let Some(e) = self.epsilon {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(CliError::config("epsilon must be finite and non-negative"));
            }
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(CliError::config("tmax must be positive and finite"));
        }
        if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&self.tol) {
            return Err(CliError::config(format!(
                "tol must be in [{:e}, {:e}]",
                TOL_RANGE.0, TOL_RANGE.1
            )));
        }
        if self.observable.0 == 0 || self.observable.1 == 0 {
            return Err(CliError::config("observable indices are 1-based"));
        }
        if self.hamiltonian && matches!(self.system, SystemSource::Builtin(_)) {
            return Err(CliError::config("--hamiltonian applies to system files only"));
        }
        Ok(())
    }

    /// Loads the configured system with `epsilon` applied.
    pub fn system(&self) -> CliResult<SystemSpec> {
        let sys = match &self.system {
            SystemSource::Builtin(Builtin::BlochSiegert) => {
                let params = SystemParams {
                    epsilon: self.epsilon,
                    ..self.params
                };
                return Ok(build(Builtin::BlochSiegert, &params)?);
            }
            SystemSource::Builtin(b) => build(*b, &self.params)?,
            SystemSource::File(path) => {
                if self.params != SystemParams::default() {
                    return Err(CliError::config("system parameters apply to built-in systems only"));
                }
                SystemFile::load(path)?.to_system(self.hamiltonian)?
            }
        };
        match self.epsilon {
            Some(e) => Ok(sys.with_epsilon(e)?),
            None => Ok(sys),
        }
    }

    /// `samples` equally spaced times on `[0, t_max]`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.samples;
        (0..n).map(|i| self.t_max * i as f64 / (n - 1) as f64).collect()
    }

    /// 0-based observable, checked against the dimension.
    pub fn observable_index(&self, dim: usize) -> CliResult<(usize, usize)> {
        let (i, j) = self.observable;
        if i > dim || j > dim || i == 0 || j == 0 {
            return Err(CliError::config(format!("observable ({i}, {j}) out of range for dimension {dim}")));
        }
        Ok((i - 1, j - 1))
    }
}
