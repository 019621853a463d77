//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use reins_core::SimConfig;

use crate::commands;
use crate::config::{parse_config, RunParams, DEFAULT_CONFIG};
use crate::output::Format;
use crate::validate::{all_passed, report_json, run_validate, Status, ValidateOptions};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Equilibrium,
    Trajectory,
    Sweep,
    Simulate,
    Validate,
}

#[derive(Debug, Parser)]
#[command(
    name = "reins",
    version,
    about = "Equilibrium reinsurance premiums for one insurer and two reinsurers"
)]
pub struct Args {
    /// Config file of `name = value` lines; the base market when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "equilibrium")]
    pub command: Command,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// `start:stop:n`; times for equilibrium and trajectory, values for sweep.
    #[arg(long)]
    pub grid: Option<String>,
    /// Parameter to sweep.
    #[arg(long)]
    pub param: Option<String>,
    /// Monte Carlo paths (simulate and validate).
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the raw terminal surpluses of `simulate` to this CSV file.
    #[arg(long)]
    pub samples: Option<PathBuf>,
}

/// Environment variable scaling every validation tolerance.
pub const TOL_ENV: &str = "REINS_TOL";

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("reins: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn load_config(path: Option<&PathBuf>) -> Result<RunParams, CliError> {
    match path {
        None => Ok(parse_config(DEFAULT_CONFIG)?),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            Ok(parse_config(&text)?)
        }
    }
}

fn tolerance_scale() -> Result<f64, CliError> {
    match std::env::var(TOL_ENV) {
        Err(_) => Ok(1.0),
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| *x > 0.0 && x.is_finite())
            .ok_or_else(|| {
                CliError::Usage(format!("{TOL_ENV} must be a positive number, got `{v}`"))
            }),
    }
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let run = load_config(args.config.as_ref())?;
    let grid = args.grid.as_deref().map(commands::parse_grid).transpose()?;
    if args.param.is_some() && args.command != Command::Sweep {
        return Err(CliError::Usage("--param only applies to sweep".into()));
    }
    if args.samples.is_some() && args.command != Command::Simulate {
        return Err(CliError::Usage("--samples only applies to simulate".into()));
    }
    let text = match args.command {
        Command::Equilibrium => commands::equilibrium(&run, grid.as_deref())?.render(args.format),
        Command::Trajectory => commands::trajectory(&run, grid.as_deref())?.render(args.format),
        Command::Sweep => {
            let param = args
                .param
                .as_deref()
                .ok_or_else(|| CliError::Usage("sweep needs --param".into()))?;
            let grid = grid.ok_or_else(|| CliError::Usage("sweep needs --grid".into()))?;
            commands::sweep(&run, param, &grid)?.render(args.format)
        }
        Command::Simulate => {
            let cfg = SimConfig::new(args.paths.unwrap_or(10_000), args.seed);
            let (table, samples) = commands::simulate_summary(&run, &cfg)?;
            if let Some(path) = &args.samples {
                fs::write(path, commands::samples_csv(&samples))?;
            }
            table.render(args.format)
        }
        Command::Validate => {
            let scale = tolerance_scale()?;
            let opts = ValidateOptions {
                scale,
                paths: args.paths.unwrap_or(20_000),
                seed: args.seed,
            };
            let checks = run_validate(&run, &opts);
            emit(args, &report_json(&checks, scale))?;
            if !all_passed(&checks) {
                let failed: Vec<&str> = checks
                    .iter()
                    .filter(|c| c.status == Status::Fail)
                    .map(|c| c.name)
                    .collect();
                return Err(CliError::Validation(failed.join(", ")));
            }
            return Ok(());
        }
    };
    emit(args, &text)
}

fn emit(args: &Args, text: &str) -> Result<(), CliError> {
    match &args.out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
