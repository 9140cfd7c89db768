use std::process::ExitCode;

use clap::Parser;

use adaptive_dg::cli::{Cli, Command};
use adaptive_dg::commands;
use adaptive_dg::error::CliError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => commands::run(args).map(|_| ()),
        Command::Verify(args) => commands::verify(args),
        Command::Sweep(args) => commands::sweep(args).and_then(|rows| {
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            if failed == 0 {
                Ok(())
            } else {
                Err(CliError::Sweep {
                    failed,
                    total: rows.len(),
                })
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn report(e: &CliError) {
    eprintln!("error: {e}");
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
}
