//! Problem files, result tables and subcommands behind the `dyndist` binary.

pub mod commands;
pub mod problem;
pub mod table;

pub use commands::run;
pub use problem::Problem;
pub use table::{Cell, ResultTable};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: dyndist::Error },
    #[error("unresolved reference '{name}'{}", at_line(*.line))]
    Unresolved { line: usize, name: String },
    #[error(transparent)]
    Numeric(#[from] dyndist::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

fn at_line(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" on line {line}")
    }
}

impl CliError {
    /// 2 for parse and validation errors, 3 for divergence, 4 for unresolved names.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Unresolved { .. } => 4,
            CliError::Numeric(dyndist::Error::Divergence { .. })
            | CliError::Invalid {
                source: dyndist::Error::Divergence { .. },
                ..
            } => 3,
            _ => 2,
        }
    }
}
