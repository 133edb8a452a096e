mod args;
mod commands;
mod failure;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::failure::INPUT_ERROR;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(INPUT_ERROR);
        }
    }
    match commands::run(&cli) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            let printed = if cli.json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&outcome.json).expect("json value"))
            } else {
                write!(stdout, "{}", outcome.text)
            };
            if printed.is_err() {
                return ExitCode::from(INPUT_ERROR);
            }
            ExitCode::from(outcome.code)
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
