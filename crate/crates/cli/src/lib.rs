//! Command-line front end for `ellres`: loads fixed-point models and Chern
//! root configurations from JSON, evaluates genera and `C_n`, and runs the
//! verification suites.

pub mod args;
pub mod commands;
pub mod input;
pub mod report;
pub mod suites;

use args::{Cli, Command};
use input::CliResult;

/// Output text and exit code for a parsed command line.
pub fn run(cli: &Cli) -> CliResult<(String, u8)> {
    match &cli.command {
        Command::Genus(a) => Ok((commands::genus(a)?, 0)),
        Command::Residue(a) => Ok((commands::residue(a)?, 0)),
        Command::Verify(a) => {
            let report = suites::run_suite(a)?;
            let text = if a.json {
                report.to_json() + "\n"
            } else {
                report.to_text()
            };
            Ok((text, if report.pass { 0 } else { 1 }))
        }
    }
}
