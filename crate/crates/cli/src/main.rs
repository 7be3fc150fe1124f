mod args;
mod cache;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Run;

/// Invalid flags or unreadable input; exits with status 2 like spec errors.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// 3 for the dimension cap, 2 for spec, range and usage errors, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<cetradeoff::Error>() {
            return match e {
                cetradeoff::Error::DimensionCap { .. } => 3,
                _ => 2,
            };
        }
        if cause.is::<UsageError>() {
            return 2;
        }
    }
    1
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    let run = Run::new(&cli.out, cli.seed);
    match &cli.command {
        Command::Capacity(a) => commands::capacity(&run, a),
        Command::Sweep(a) => commands::sweep(&run, a),
        Command::Verify(a) => commands::verify(&run, a),
        Command::DemoMainTheorem(a) => commands::demo(&run, a),
        Command::Describe(a) => commands::describe(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
