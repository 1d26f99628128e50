use std::process::ExitCode;

use ancss_cli::{exit, parse_config, run, Args, Mode};
use clap::Parser;

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match parse_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit::CONFIG);
        }
    };
    match run(&config) {
        Ok(outcome) => {
            if let Some(report) = &outcome.report {
                print!("{}", report.table());
            }
            eprintln!("wrote {} rows to {}", outcome.rows_written, config.out.display());
            if config.mode == Mode::Verify && outcome.gate_failed() {
                ExitCode::from(exit::GATE_FAILED)
            } else {
                ExitCode::from(exit::OK)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::CONFIG)
        }
    }
}
