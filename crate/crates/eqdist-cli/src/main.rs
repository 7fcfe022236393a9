//! Command-line driver: dispatches to the dense-divisibility predicate,
//! the exponential-sum evaluators, the completion/van der Corput audits,
//! the sieve decompositions, the exponent-region optimizer and the
//! experiment harness. Exit codes: 0 success, 1 computation/assertion
//! failure, 2 usage error.

use std::process::ExitCode;

mod args;
mod commands;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match args::Parsed::new(&argv) {
        Err(msg) => {
            eprintln!("error: {msg}");
            eprintln!();
            eprint!("{}", commands::USAGE);
            ExitCode::from(2)
        }
        Ok(parsed) => match commands::dispatch(&parsed) {
            Ok(()) => ExitCode::SUCCESS,
            Err(commands::CliError::Usage(msg)) => {
                eprintln!("error: {msg}");
                eprintln!();
                eprint!("{}", commands::USAGE);
                ExitCode::from(2)
            }
            Err(commands::CliError::Failed(msg)) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        },
    }
}
