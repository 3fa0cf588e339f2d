//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 usage error (single-line diagnostic on stderr),
//! 2 data or model error.

mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use commands::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if e.kind() == ErrorKind::InvalidSubcommand {
                // Unknown subcommand: diagnostic plus the usage text.
                eprintln!("{}", e.render());
            } else {
                eprintln!("{}", single_line(&e));
            }
            return ExitCode::from(1);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Collapse a clap error into one diagnostic line (everything before the
/// usage block, newlines folded).
fn single_line(e: &clap::Error) -> String {
    let rendered = e.render().to_string();
    let before_usage = rendered.split("Usage:").next().unwrap_or(&rendered);
    before_usage.split_whitespace().collect::<Vec<_>>().join(" ")
}
