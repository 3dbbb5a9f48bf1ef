use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    aniso_core::cli::main_with(aniso_core::cli::Cli::parse())
}
