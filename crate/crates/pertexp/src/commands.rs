use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use pertexp_core::expansion::{convergence_horizon, expand_with, ExpandOptions, HorizonBound, Method};
use pertexp_core::linalg::ComplexMatrix;
use pertexp_core::propagator::propagate;
use pertexp_core::reference::{error_curve, reference_propagate};
use pertexp_core::Complex64;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const CSV_HEADER: &str = "t,P,P_ref,abs_err,unitarity_defect";

/// Full double precision: 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub t: f64,
    pub p: f64,
    pub p_ref: f64,
    pub abs_err: f64,
    pub unitarity_defect: f64,
}

impl Row {
    pub fn csv(&self) -> String {
        [self.t, self.p, self.p_ref, self.abs_err, self.unitarity_defect]
            .map(fmt17)
            .join(",")
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub rows: Vec<Row>,
    /// Magnus and Floquet–Magnus convergence horizons of the full generator.
    pub horizons: (f64, f64),
}

impl RunReport {
    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(|r| r.abs_err).fold(0.0, f64::max)
    }

    pub fn max_defect(&self) -> f64 {
        self.rows.iter().map(|r| r.unitarity_defect).fold(0.0, f64::max)
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(out, "{}", r.csv())?;
        }
        Ok(())
    }
}

fn options(cfg: &RunConfig) -> ExpandOptions {
    ExpandOptions {
        resonance: cfg.resonance,
        ..Default::default()
    }
}

/// Expansion, propagation and reference solve on the configured grid.
pub fn run(cfg: &RunConfig) -> CliResult<RunReport> {
    cfg.validate()?;
    let sys = cfg.system()?;
    let obs = cfg.observable_index(sys.dim())?;
    let times = cfg.grid();
    let series = expand_with(&sys, cfg.method, cfg.order, &options(cfg))?;
    let approx = propagate(&series, &times, sys.epsilon(), cfg.mode, obs)?;
    let reference = reference_propagate(&sys, &times, cfg.tol, obs)?;
    let errors = error_curve(&approx, &reference, obs)?;
    let rows = errors
        .iter()
        .enumerate()
        .map(|(n, &(t, abs_err))| Row {
            t,
            p: approx.probabilities[n],
            p_ref: reference.probabilities[n],
            abs_err,
            unitarity_defect: approx.defects[n],
        })
        .collect();
    Ok(RunReport {
        rows,
        horizons: horizon(cfg)?,
    })
}

/// `H_ef = i F(eps)`; for quantum averaging `F` is taken at `t = 0`.
pub fn effective(cfg: &RunConfig) -> CliResult<ComplexMatrix> {
    cfg.validate()?;
    if !matches!(
        cfg.method,
        Method::FloquetMagnus | Method::LieDeprit | Method::QuantumAveraging
    ) {
        return Err(CliError::config("effective Hamiltonians are defined for fm, ld and qa"));
    }
    let sys = cfg.system()?;
    let series = expand_with(&sys, cfg.method, cfg.order, &options(cfg))?;
    Ok(series.f_sum(0.0, sys.epsilon()).scale(Complex64::new(0.0, 1.0)))
}

/// Rows `row,col,re,im` (1-based) of a matrix.
pub fn matrix_csv(m: &ComplexMatrix) -> String {
    let mut s = String::from("row,col,re,im\n");
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            let z = m[(i, j)];
            s.push_str(&format!("{},{},{},{}\n", i + 1, j + 1, fmt17(z.re), fmt17(z.im)));
        }
    }
    s
}

/// Magnus and Floquet–Magnus horizons of the full generator `A(t)`.
pub fn horizon(cfg: &RunConfig) -> CliResult<(f64, f64)> {
    let sys = cfg.system()?;
    let a = sys.generator(sys.epsilon())?;
    Ok((
        convergence_horizon(&a, HorizonBound::Magnus),
        convergence_horizon(&a, HorizonBound::FloquetMagnus),
    ))
}

/// A parameter swept over a list of values.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<String>,
}

impl Sweep {
    /// Parses `key=v1,v2,...`.
    pub fn parse(s: &str) -> CliResult<Self> {
        let (key, list) = s
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("sweep `{s}` is not of the form key=v1,v2,...")))?;
        let values: Vec<String> = list.split(',').map(|v| v.trim().to_string()).collect();
        if values.iter().any(|v| v.is_empty()) {
            return Err(CliError::config("empty sweep value"));
        }
        Ok(Sweep {
            key: key.trim().to_string(),
            values,
        })
    }

    /// One configuration per value, in the given order.
    pub fn configs(&self, base: &RunConfig) -> CliResult<Vec<RunConfig>> {
        self.values.iter().map(|v| apply(base, &self.key, v)).collect()
    }
}

fn number(key: &str, v: &str) -> CliResult<f64> {
    v.parse()
        .map_err(|_| CliError::config(format!("sweep value `{v}` for {key} is not a number")))
}

fn apply(base: &RunConfig, key: &str, v: &str) -> CliResult<RunConfig> {
    let mut cfg = base.clone();
    match key {
        "epsilon" => cfg.epsilon = Some(number(key, v)?),
        "omega" => cfg.params.omega = Some(number(key, v)?),
        "omega0" => cfg.params.omega0 = Some(number(key, v)?),
        "beta" => cfg.params.beta = Some(number(key, v)?),
        "b" => cfg.params.b = Some(number(key, v)?),
        "order" => {
            cfg.order = v
                .parse()
                .map_err(|_| CliError::config(format!("sweep order `{v}` is not an integer")))?
        }
        "method" => cfg.method = v.parse()?,
        _ => return Err(CliError::config(format!("cannot sweep over `{key}`"))),
    }
    Ok(cfg)
}

/// Runs every configuration on up to `threads` workers; results keep the input order.
pub fn run_many(configs: &[RunConfig], threads: usize) -> Vec<CliResult<RunReport>> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<CliResult<RunReport>>>> = configs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, configs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= configs.len() {
                    break;
                }
                let result = run(&configs[i]);
                *slots[i].lock().expect("result slot") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("result slot").expect("every config ran"))
        .collect()
}

/// Merged sweep CSV with the swept value as a leading column.
pub fn write_sweep_csv(sweep: &Sweep, reports: &[RunReport], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{},{CSV_HEADER}", sweep.key)?;
    for (value, report) in sweep.values.iter().zip(reports) {
        for r in &report.rows {
            writeln!(out, "{value},{}", r.csv())?;
        }
    }
    Ok(())
}
