use std::process::ExitCode;

use clap::Parser;
use nfsp::harness::{cli, init_global_threads};

fn main() -> ExitCode {
    let args = cli::Cli::parse();
    let result = init_global_threads().and_then(|()| cli::run(args, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
