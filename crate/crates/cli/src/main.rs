//! `jetsim`: generate oracle datasets, check informativity, simulate from
//! data and compare against ground truth.
//!
//! Every failure ends with `ERROR code=<n> kind=<kind>` on stderr.

mod commands;
mod config;
mod failure;
mod plot;

use std::process::ExitCode;

use clap::Command;

use config::{check_keys, command, simulate_keys, Settings, COMPARE, GENERATE};
use failure::Failure;

fn cli() -> Command {
    Command::new("jetsim")
        .about("Data-driven simulation of continuous-time LTI systems from input-output jets")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .subcommand(command(
            "generate",
            "Draw a random system and write a dataset, its exact jets, a target run and problem.txt",
            GENERATE,
        ))
        .subcommand(command("check", "Test whether a dataset is informative", &check_keys()))
        .subcommand(command("simulate", "Simulate the response to a target input from data", &simulate_keys()))
        .subcommand(command("compare", "Per-channel errors of a result against a reference output", COMPARE))
}

fn run() -> Result<(), Failure> {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => {
            let _ = e.print();
            return Err(Failure::new(2, "usage", "invalid command line"));
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    match name {
        "generate" => commands::generate(&Settings::from_matches(sub, GENERATE)?),
        "check" => commands::check(&Settings::from_matches(sub, &check_keys())?),
        "simulate" => commands::simulate(&Settings::from_matches(sub, &simulate_keys())?),
        "compare" => commands::compare(&Settings::from_matches(sub, COMPARE)?),
        _ => unreachable!("unknown subcommand"),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            if let Some(hint) = &f.hint {
                eprintln!("hint: {hint}");
            }
            eprintln!("ERROR code={} kind={}", f.code, f.kind);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_definition_is_consistent() {
        cli().debug_assert();
    }
}
