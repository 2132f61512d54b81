//! Command-line front end for sumlab.

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

pub mod args;
pub mod commands;
pub mod io;
pub mod oracle;
pub mod plot;
pub mod verify;

/// Exit status 0 on success, 2 when a mathematical hypothesis fails, 1 for
/// everything else. Errors go to stderr as one JSON object.
pub fn main_with<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report("usage", &e.to_string());
            return ExitCode::from(1);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let hypothesis = e.downcast_ref::<sumlab_core::Error>().is_some_and(|e| e.is_hypothesis());
            if hypothesis {
                report("hypothesis", &format!("{e:#}"));
                ExitCode::from(2)
            } else if e.downcast_ref::<commands::VerificationFailed>().is_some() {
                report("verification", &format!("{e:#}"));
                ExitCode::from(1)
            } else {
                report("error", &format!("{e:#}"));
                ExitCode::from(1)
            }
        }
    }
}

fn report(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message.trim_end() }));
}
