//! Command-line front end for `graphtv`.

pub mod args;
pub mod commands;
pub mod error;
pub mod problem;
pub mod trajectory;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::Cli;
pub use commands::{execute, Outcome};
pub use error::CliError;

/// Parses `argv`, runs the command, writes its output, and returns the
/// process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => match outcome.emit() {
            Ok(()) => outcome.exit_code(),
            Err(e) => {
                eprintln!("graphtv: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            eprintln!("graphtv: {e}");
            e.exit_code()
        }
    }
}

impl Outcome {
    pub fn emit(&self) -> Result<(), CliError> {
        match &self.destination {
            Some(path) => std::fs::write(path, &self.text).map_err(|error| CliError::Io {
                path: path.display().to_string(),
                error,
            }),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(self.text.as_bytes())
                    .and_then(|()| stdout.flush())
                    .map_err(|error| CliError::Io {
                        path: "stdout".into(),
                        error,
                    })
            }
        }
    }
}
