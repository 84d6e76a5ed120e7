//! The `tps` command-line tool. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code.

pub mod args;
pub mod checks;
pub mod commands;
pub mod error;
pub mod manifest;

use std::ffi::OsString;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, Result};

/// Caps the global worker pool from `TPS_THREADS` when set.
fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("TPS_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("TPS_THREADS must be a positive integer, got {value:?}")))?;
    // a pool may already exist when run() is called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(command: &Command) -> Result<()> {
    configure_threads()?;
    match command {
        Command::Augment(a) => commands::augment::run(a),
        Command::Sweep(a) => commands::sweep::run(a),
        Command::Report(a) => commands::report::run(a),
        Command::Selftest(a) => commands::selftest::run(a),
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            if !matches!(e, CliError::Selftest(_)) {
                eprintln!("error: {e}");
            }
            e.exit_code()
        }
    }
}
