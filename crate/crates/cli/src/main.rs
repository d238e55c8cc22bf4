mod cli;
mod commands;
mod config;
mod data;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::config::RunConfig;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cli.command.apply(&mut cfg);
    match &cli.command {
        Command::Train(_) => commands::train::run(&cfg),
        Command::Eval(_) => commands::eval::run(&cfg),
        Command::Generate(_) => commands::generate::run(&cfg),
        Command::Inspect(_) => commands::inspect::run(&cfg),
    }
}
