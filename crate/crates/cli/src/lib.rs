//! Library behind the `actortrace` binary: configuration, the per-address
//! extraction pipeline, training and reporting.

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;

use clap::Parser;

pub use commands::{execute, Cli, Command};
pub use config::PipelineConfig;
pub use error::{CliError, Result};

/// Parse `args` and run; returns the process exit code.
pub fn run_args<I, T, W>(args: I, stdout: W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    W: std::io::Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) if e.is_broken_pipe() => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            e.exit_code()
        }
    }
}
