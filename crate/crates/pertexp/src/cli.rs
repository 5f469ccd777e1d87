use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pertexp_core::expansion::{Method, ResonancePolicy};
use pertexp_core::propagator::AssemblyMode;
use pertexp_core::reference::DEFAULT_TOL;
use pertexp_core::systems::SystemParams;

use crate::commands::{self, fmt17, matrix_csv, Sweep};
use crate::config::{RunConfig, SystemSource};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "pertexp", version, about = "Exponential perturbative expansions for linear time-dependent systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate with an expansion and compare against the reference solver (CSV output).
    Run(RunArgs),
    /// Print the effective Hamiltonian H_ef = i F(eps).
    Effective(SystemArgs),
    /// Print the Magnus and Floquet-Magnus convergence horizons of the full generator.
    Horizon(SystemArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Full,
    Effective,
    Generator,
}

impl From<ModeArg> for AssemblyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => AssemblyMode::Full,
            ModeArg::Effective => AssemblyMode::EffectiveOnly,
            ModeArg::Generator => AssemblyMode::GeneratorOnly,
        }
    }
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// Built-in system (three-lambda-periodic, three-lambda-qp, bloch-siegert) or a JSON system file.
    #[arg(long)]
    pub system: String,
    /// magnus, fm, rm, sp, ld or qa.
    #[arg(long, default_value = "fm")]
    pub method: String,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    /// Second frequency of three-lambda-qp (default sqrt(2) omega).
    #[arg(long)]
    pub omega2: Option<f64>,
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Bloch-Siegert amplitude, epsilon = 2b.
    #[arg(long)]
    pub b: Option<f64>,
    /// Three-lambda systems: measure time in units of 1/omega.
    #[arg(long)]
    pub scaled_time: bool,
    /// System files: read matrices as H and use A = -i H.
    #[arg(long)]
    pub hamiltonian: bool,
    /// Raise an error at exact resonances instead of producing secular terms (ld).
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, default_value_t = 10.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Transition i,j (1-based); P = |U_ij|^2.
    #[arg(long, default_value = "1,2")]
    pub observable: String,
    /// Reference solver tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "full")]
    pub mode: ModeArg,
    /// CSV destination (stdout if absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Parameter sweep `key=v1,v2,...` over epsilon, omega, omega0, beta, b, order or method.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
}

fn observable(s: &str) -> CliResult<(usize, usize)> {
    let (i, j) = s
        .split_once(',')
        .ok_or_else(|| CliError::config(format!("observable `{s}` is not of the form i,j")))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|_| CliError::config(format!("observable index `{x}` is not a positive integer")))
    };
    Ok((parse(i)?, parse(j)?))
}

impl SystemArgs {
    pub fn config(&self) -> CliResult<RunConfig> {
        Ok(RunConfig {
            system: SystemSource::parse(&self.system),
            method: self.method.parse().map_err(|e| CliError::config(format!("{e}")))?,
            order: self.order,
            epsilon: self.epsilon,
            params: SystemParams {
                omega: self.omega,
                omega2: self.omega2,
                omega0: self.omega0,
                beta: self.beta,
                b: self.b,
                epsilon: None,
                scaled_time: self.scaled_time,
            },
            hamiltonian: self.hamiltonian,
            resonance: if self.strict {
                ResonancePolicy::Strict
            } else {
                ResonancePolicy::Secular
            },
            ..RunConfig::default()
        })
    }
}

impl RunArgs {
    pub fn config(&self) -> CliResult<RunConfig> {
        Ok(RunConfig {
            t_max: self.tmax,
            samples: self.samples,
            observable: observable(&self.observable)?,
            tol: self.tol,
            mode: self.mode.into(),
            output: self.output.clone(),
            ..self.system.config()?
        })
    }
}

fn sink(path: Option<&PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_run(args: &RunArgs, err: &mut dyn Write) -> CliResult<()> {
    let cfg = args.config()?;
    cfg.validate()?;
    match &args.sweep {
        None => {
            let report = commands::run(&cfg)?;
            let mut out = sink(cfg.output.as_ref())?;
            report.write_csv(&mut out)?;
            out.flush()?;
            writeln!(
                err,
                "{} N={}: max |dP| = {}, max unitarity defect = {}, horizons magnus = {}, floquet-magnus = {}",
                cfg.method,
                cfg.order,
                fmt17(report.max_error()),
                fmt17(report.max_defect()),
                fmt17(report.horizons.0),
                fmt17(report.horizons.1),
            )?;
        }
        Some(list) => {
            let sweep = Sweep::parse(list)?;
            let configs = sweep.configs(&cfg)?;
            let threads = args
                .threads
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let reports = commands::run_many(&configs, threads)
                .into_iter()
                .collect::<CliResult<Vec<_>>>()?;
            let mut out = sink(cfg.output.as_ref())?;
            commands::write_sweep_csv(&sweep, &reports, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn cmd_effective(args: &SystemArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = args.config()?;
    let h = commands::effective(&cfg)?;
    let eps = cfg.system()?.epsilon();
    let note = if cfg.method == Method::QuantumAveraging { " at t = 0" } else { "" };
    writeln!(
        out,
        "# H_ef = i F(eps){note}, method {}, order {}, epsilon {}",
        cfg.method,
        cfg.order,
        fmt17(eps)
    )?;
    write!(out, "{}", matrix_csv(&h))?;
    Ok(())
}

fn cmd_horizon(args: &SystemArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = args.config()?;
    let (magnus, fm) = commands::horizon(&cfg)?;
    writeln!(out, "bound,t_f")?;
    writeln!(out, "magnus,{}", fmt17(magnus))?;
    writeln!(out, "floquet-magnus,{}", fmt17(fm))?;
    Ok(())
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, err),
        Command::Effective(a) => cmd_effective(a, out),
        Command::Horizon(a) => cmd_horizon(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
