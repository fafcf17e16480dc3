mod args;
mod error;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Validate(a) => run::validate(a),
        Command::Sweep(a) => run::sweep(a),
        Command::Traffic(a) => run::traffic(a),
        Command::DumpCorrelation(a) => run::dump_correlation(a),
    };
    match outcome {
        Ok(manifest) => {
            println!("wrote {}", run::display(&manifest));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
