use std::process::ExitCode;

use clap::Parser;
use twbn_slim::{bench, learn, Cli, Command};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Learn(args) => learn(args, &mut std::io::stdout().lock()).map(|_| ()),
        Command::Bench(args) => bench(args).map(|rows| log::info!("{rows} rows written")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
