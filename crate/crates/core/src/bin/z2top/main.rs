mod cli;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command, FileConfig};

/// Failures that stop a command before it produces output.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] z2top::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use z2top::Error as E;
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Core(E::InvalidParameter(_) | E::DimensionMismatch { .. } | E::Unsupported(_)) => 2,
            CliError::Core(E::Domain(_) | E::DegenerateOrbit(_) | E::Branch(_)) => 5,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = FileConfig::load(cli.config.as_deref()).and_then(|file| match cli.command {
        Command::Geometry(a) => commands::geometry(a, &file),
        Command::Equations(a) => commands::equations(a, &file),
        Command::Run(a) => commands::run(a, &file),
        Command::Reduce(a) => commands::reduce(a, &file),
        Command::Zk(a) => commands::zk(a, &file),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{} {e}", output::Style::stderr().warn("error:"));
            ExitCode::from(e.exit_code())
        }
    }
}
