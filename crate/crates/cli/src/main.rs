//! `chancomp`: certified complexity intervals from the command line.
//!
//! Exit codes: 0 success, 1 a checked inequality failed, 2 invalid input,
//! 3 numerical non-convergence, 64 usage error.

mod args;
mod commands;
mod failure;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, CommonArgs, VerifyCommand};
use failure::Failure;
use report::Run;

const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let (name, common, seed) = describe(&cli.command);
    let mut run = Run::new(&common.out, name, argv, Some(seed), common.threads);
    let outcome = configure_threads(common.threads).and_then(|_| commands::execute(&cli.command, &mut run, common.plot));
    if let Err(f) = &outcome {
        eprintln!("{f}");
    }
    ExitCode::from(run.finish(&outcome))
}

fn configure_threads(threads: Option<usize>) -> Result<(), Failure> {
    match threads {
        None => Ok(()),
        Some(0) => Err(Failure::Validation("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Validation(format!("thread pool: {e}"))),
    }
}

fn describe(command: &Command) -> (&'static str, &CommonArgs, u64) {
    match command {
        Command::Complexity { common, solve, .. } => ("complexity", common, solve.seed),
        Command::ExpectedLength { common, solve, .. } => ("expected-length", common, solve.seed),
        Command::CbComplexity { common, solve, .. } => ("cb-complexity", common, solve.seed),
        Command::Diamond { common, seed, .. } => ("diamond", common, *seed),
        Command::ReturnTime { common, seed, .. } => ("return-time", common, *seed),
        Command::Trajectory { common, solve, .. } => ("trajectory", common, solve.seed),
        Command::GroupStats { common, seed, .. } => ("group-stats", common, *seed),
        Command::Verify { check } => match check {
            VerifyCommand::Pauli { common, seed, .. } => ("verify pauli", common, *seed),
            VerifyCommand::Clifford { common, seed, .. } => ("verify clifford", common, *seed),
            VerifyCommand::TensorAdditivity { common, solve, .. } => ("verify tensor-additivity", common, solve.seed),
            VerifyCommand::WordLength { common, solve, .. } => ("verify word-length", common, solve.seed),
        },
    }
}
