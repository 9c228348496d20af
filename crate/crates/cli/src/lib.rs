//! Command-line front end: argument parsing, subcommand dispatch and
//! experiment configuration files.

pub mod args;
pub mod commands;
mod error;
pub mod experiment;

use std::ffi::OsString;

use clap::Parser;

pub use error::{CliError, CliResult};

use args::{Cli, Command};

/// Caps the worker pool from `SIMSPACE_THREADS` when it is set.
fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("SIMSPACE_THREADS") else {
        return Ok(());
    };
    let threads: usize = match value.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => {
            return Err(CliError::Validation(format!(
                "SIMSPACE_THREADS must be a positive integer, got `{value}`"
            )))
        }
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn dispatch(command: &Command) -> CliResult<()> {
    match command {
        Command::Mds(a) => commands::mds(a),
        Command::Stress(a) => commands::stress(a),
        Command::Correlate(a) => commands::correlate(a),
        Command::PixelBaseline(a) => commands::pixel_baseline(a),
        Command::Augment(a) => commands::augment(a),
        Command::Regress(a) => commands::regress(a),
        Command::Experiment(a) => {
            let outcome = experiment::run_file(&a.config, a.output_dir.as_deref())?;
            print!("{}", experiment::render_table(&outcome.rows));
            Ok(())
        }
    }
}

/// Parses `args` and runs the subcommand, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads().and_then(|_| dispatch(&cli.command)) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    0
}
