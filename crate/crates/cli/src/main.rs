//! `datadim` command-line frontend.
//!
//! Each subcommand prints one [`RunReport`]. Exit codes: 0 on success, 2 for
//! usage and input errors, 3 when the data is degenerate for the requested
//! estimate.

mod args;
mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;

use args::Cli;
use report::{ErrorField, RunReport, VERSION};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    let out = commands::run(cli.command);

    let (results, error, code) = match out.results {
        Ok(r) => (Some(r), None, 0),
        Err(e) => {
            let code = if e.is_degenerate() { 3 } else { 2 };
            eprintln!("error: {e}");
            (None, Some(ErrorField { code: e.code().to_owned(), message: e.to_string() }), code)
        }
    };
    let timestamp = (!json).then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
    let report = RunReport {
        command: out.command.to_owned(),
        parameters: out.parameters,
        results,
        error,
        warnings: out.warnings,
        version: VERSION.to_owned(),
        timestamp,
    };
    let text = if json { serde_json::to_string(&report) } else { serde_json::to_string_pretty(&report) };
    // A closed stdout (e.g. piped into `head`) is not worth a panic.
    let _ = writeln!(std::io::stdout().lock(), "{}", text.expect("report serializes"));
    ExitCode::from(code)
}
