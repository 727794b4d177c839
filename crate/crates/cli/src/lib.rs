//! Command-line front end for `soundcone`: configuration, dispatch and
//! grid serialisation.

use std::ffi::OsString;
use std::io::Write;

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, RunConfig};
pub use output::{parse, serialize, GridFile};
pub use run::run;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Clap(#[from] clap::Error),
    #[error(transparent)]
    Compute(#[from] soundcone::Error),
    #[error("malformed file: {0}")]
    Format(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Clap(e) => e.exit_code(),
            CliError::Compute(soundcone::Error::ResourceGuard(_)) => EXIT_RESOURCE,
            CliError::Compute(soundcone::Error::Configuration(_)) => EXIT_USAGE,
            CliError::Compute(_) | CliError::Format(_) | CliError::Io(_) => EXIT_COMPUTATION,
        }
    }
}

/// Parses, runs and writes the result to `--output` or stdout.
pub fn execute<I, T>(argv: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = parse_config(argv)?;
    let file = run(&cfg)?;
    let bytes = serialize(&file, cfg.format)?;
    match &cfg.output {
        Some(path) => output::write_atomic(path, &bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
