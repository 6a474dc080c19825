mod args;
mod commands;
mod config;
mod error;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let (output, ok) = match &cli.command {
        Command::Plan(args) => (commands::plan(args, false)?, true),
        Command::Bracket(args) => (commands::plan(args, true)?, true),
        Command::Verify(args) => commands::verify(args)?,
        Command::Simulate(args) => commands::simulate_cmd(args)?,
        Command::Plotdata(args) => (commands::plotdata(args)?, true),
    };
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(output.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| CliError::Usage(e.into()))?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("focusplan: {e}");
            e.exit_code()
        }
    }
}
