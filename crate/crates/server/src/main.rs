use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = fiper_server::cli::Cli::parse();
    match fiper_server::cli::run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("fiper: {err:#}");
            ExitCode::FAILURE
        }
    }
}
