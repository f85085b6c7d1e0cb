//! `scenario-cert` command-line tool.

mod args;
mod commands;
mod config;
mod docs;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, ExampleCommand};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let indent = cli.json_indent;
    let result = match cli.command {
        Command::Epsilon(a) => commands::epsilon(a, indent),
        Command::Certify(a) => commands::certify(a, indent),
        Command::Cdf(a) => commands::cdf(a, indent),
        Command::Example(ExampleCommand::PolePlacement(a)) => {
            commands::example_pole_placement(a, indent)
        }
        Command::Example(ExampleCommand::InputDesign(a)) => {
            commands::example_input_design(a, indent)
        }
        Command::Validate(a) => commands::validate(a, indent),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
