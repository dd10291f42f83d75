use std::process::ExitCode;

use cartan_cli::{run, Args};
use clap::Parser;

fn main() -> ExitCode {
    let args = Args::parse();
    ExitCode::from(run(&args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock()))
}
