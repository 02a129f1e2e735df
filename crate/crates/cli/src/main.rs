mod args;
mod commands;
mod error;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn run(cli: &Cli) -> Result<commands::Outcome, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Eval { integral, via } => commands::eval(g, integral, *via),
        Command::Verify { case } => commands::verify(g, case),
        Command::Moments { order, cap } => commands::moments(g, *order, *cap),
        Command::Pairings { n, list, cap } => commands::pairings(g, *n, *list, *cap),
        Command::Carleman { norm, nmax, full } => commands::carleman(g, *norm, *nmax, *full),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.global.out {
        Some(path) => std::fs::write(path, text).map_err(CliError::Output),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(CliError::Output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|o| emit(&cli, &o.text).map(|_| o.ok)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("usage: funcint verify --case <A..J|all|FILE> [--dims 1,2,4] [--tol 1e-8] [--mc-samples N] [--seed S]");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
