use std::io;
use std::process::ExitCode;

use clap::Parser;
use profitscale_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::BufWriter::new(io::stdout().lock());
    match profitscale_cli::run(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if profitscale_cli::is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(profitscale_cli::exit_code(&e))
        }
    }
}
