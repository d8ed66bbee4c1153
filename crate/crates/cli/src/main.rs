mod cli;
mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use config::{CommandKind, RunConfig};
use error::{CliResult, EXIT_OK, EXIT_VALIDATION};

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Gen(args) => commands::cmd_gen(&RunConfig::resolve(CommandKind::Gen, &args.common, Some(args))?),
        Command::Cv(args) => commands::cmd_cv(&RunConfig::resolve(CommandKind::Cv, args, None)?),
        Command::Ablate(args) => commands::cmd_ablate(&RunConfig::resolve(CommandKind::Ablate, args, None)?),
        Command::Gradcheck(args) => commands::cmd_gradcheck(
            &RunConfig::resolve(CommandKind::Gradcheck, &args.common, None)?,
            args.corrupt_gradient,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
