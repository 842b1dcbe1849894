use std::process::ExitCode;

use clap::Parser;
use mweyl::cli::{run, Args};

fn main() -> ExitCode {
    run(&Args::parse())
}
