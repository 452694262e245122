use std::fmt;
use std::path::{Path, PathBuf};

use crate::config::Diagnostic;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Configuration problems; exit code 1.
    Validation(Vec<Diagnostic>),
    /// A tolerance was breached or the numerics failed; exit code 2.
    Numerical(String),
    /// Reading or writing a file failed; exit code 3.
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), message: err.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl From<xva_core::Error> for CliError {
    fn from(e: xva_core::Error) -> Self {
        match e {
            xva_core::Error::Validation(m) => CliError::Validation(vec![Diagnostic::new("", m)]),
            xva_core::Error::Domain(m) => CliError::Numerical(m),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(diags) => {
                write!(f, "invalid configuration")?;
                for d in diags {
                    write!(f, "\n  {d}")?;
                }
                Ok(())
            }
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}
