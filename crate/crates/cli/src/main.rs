use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = bihermitian_cli::Cli::parse();
    ExitCode::from(bihermitian_cli::run(&cli))
}
