mod args;
mod commands;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::{Cli, Command};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AFEM_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => commands::run(a),
        Command::Compare(a) => {
            let mut distinct = a.estimator.clone();
            distinct.sort_by_key(|k| k.name());
            distinct.dedup();
            if distinct.len() < 2 {
                Cli::command()
                    .error(
                        clap::error::ErrorKind::TooFewValues,
                        "compare needs at least two distinct estimators",
                    )
                    .exit();
            }
            commands::compare(a)
        }
        Command::ValidateProblem(a) => match commands::validate_problem(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::FAILURE,
            Err(e) => Err(e),
        },
        Command::ExportMesh(a) => commands::export_mesh(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
