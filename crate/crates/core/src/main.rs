use std::process::ExitCode;

use clap::Parser;
use sigmalax::cli::{run, Cli, EXIT_INPUT_ERROR};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT_ERROR as u8);
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, &outcome.output),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(outcome.output.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INPUT_ERROR as u8);
    }
    ExitCode::from(outcome.exit_code as u8)
}
