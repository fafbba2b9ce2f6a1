mod args;
mod commands;
mod config;
mod source;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use config::CliResult;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) =>
        {
            let _ = err.print();
            std::process::exit(0);
        }
        Err(err) => {
            // Usage problems (unknown subcommand or flag, bad value).
            eprint!("{err}");
            std::process::exit(1);
        }
    };
    match dispatch(&cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Synth(args) => commands::synth::run(args),
        Command::Features(args) => commands::features::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval_model::run(args),
        Command::Benchmark(args) => commands::benchmark::run(args),
        Command::Gradcheck(args) => commands::gradcheck::run(args),
        Command::Zoo => commands::zoo_catalog::run(),
    }
}
