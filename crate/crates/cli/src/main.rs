use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = coalition_cli::Cli::parse();
    match coalition_cli::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(coalition_cli::EXIT_ERROR)
        }
    }
}
