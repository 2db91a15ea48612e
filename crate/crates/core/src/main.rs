use std::process::ExitCode;

use clap::Parser;
use docembed::cli::{run, Cli};
use docembed::Error;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            // Distinguish an undefined AUC (single-class pair set) from other failures.
            match e.downcast_ref::<Error>() {
                Some(Error::UndefinedAuc { .. }) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
