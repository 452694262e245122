//! Command-line front end: reads a JSON run configuration (or a built-in
//! preset), runs exposure, capital and adjustment calculations over the
//! configured sweep and writes the breakdown as a table, CSV or JSON.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 numerical failure or
//! tolerance breach, 3 I/O error.

pub mod config;
pub mod error;
pub mod presets;
pub mod report;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use xva_core::pde::{solve_vhat, verify_decomposition, VerificationReport};

use crate::config::{Format, Loaded, Overrides, PdeSection};
pub use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "xva", version, about = "XVA breakdowns for swap portfolios under partial credit hedging")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format; overrides the config
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Monte Carlo seed; overrides the config
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Monte Carlo path count; overrides the config
    #[arg(long, global = true)]
    pub paths: Option<usize>,

    /// Worker threads for path simulation (results do not depend on it)
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the configured sweep
    Run {
        /// Config file or preset name
        config: String,
    },
    /// Check a configuration without running it
    Validate { config: String },
    /// Compare the PDE solver with the quadrature oracle on the config's `pde` section
    PdeVerify {
        config: String,
        /// Also write the adjusted-value surface as CSV
        #[arg(long)]
        surface: Option<PathBuf>,
    },
    /// List the built-in presets
    Presets,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, paths: self.paths, format: self.format, workers: self.workers }
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let overrides = cli.overrides();
    match &cli.command {
        Command::Presets => {
            emit(&presets::NAMES.map(|n| format!("{n}\n")).concat(), cli.out.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Validate { config } => {
            let format = overrides.format.unwrap_or(Format::Table);
            let diags = match config::load(config) {
                Ok(Loaded { config, base_dir, .. }) => config.validate(base_dir.as_deref()),
                Err(CliError::Validation(d)) => d,
                Err(e) => return Err(e),
            };
            emit(&report::render_diagnostics(&diags, format), cli.out.as_deref(), stdout)?;
            Ok(if diags.is_empty() { 0 } else { 1 })
        }
        Command::Run { config } => {
            let loaded = config::load(config)?;
            let resolved = loaded.config.resolve(loaded.base_dir.as_deref(), &overrides)?;
            let result = run::run(&resolved)?;
            for row in result.rows.iter().filter(|r| r.warning.is_some()) {
                let _ = writeln!(stderr, "warning: {}: {}", row.rating, row.warning.as_deref().unwrap_or_default());
            }
            emit(&report::render_run(&result, resolved.format), cli.out.as_deref(), stdout)?;
            Ok(0)
        }
        Command::PdeVerify { config, surface } => {
            let loaded = config::load(config)?;
            let resolved = loaded.config.resolve(loaded.base_dir.as_deref(), &overrides)?;
            let section = resolved.config.pde.clone().unwrap_or_default();
            let verification = pde_verify(&section, resolved.config.tolerances.pde_relative)?;
            if let Some(path) = surface {
                let solution = solve_vhat(&section.problem, &section.grid)?;
                std::fs::write(path, solution.to_csv()).map_err(|e| CliError::io(path, e))?;
            }
            for d in &verification.diagnostics {
                let _ = writeln!(stderr, "warning: {d}");
            }
            emit(&report::render_verification(&verification, resolved.format), cli.out.as_deref(), stdout)?;
            if verification.passed {
                Ok(0)
            } else {
                Err(CliError::Numerical(format!(
                    "PDE and quadrature differ by {:.3e} relative, tolerance {}",
                    verification.max_rel_error, verification.tolerance
                )))
            }
        }
    }
}

pub fn pde_verify(section: &PdeSection, tolerance: f64) -> Result<VerificationReport, CliError> {
    Ok(verify_decomposition(&section.problem, &section.grid, tolerance)?)
}
