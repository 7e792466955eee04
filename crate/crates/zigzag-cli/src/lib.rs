//! `zzi`: command line front end for the layered zig-zag Ising library.
//!
//! Exit codes: 0 success, 1 usage, 2 domain, 3 numeric non-convergence,
//! 4 consistency failure.

pub mod args;
pub mod commands;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::RunConfig;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONSISTENCY: i32 = 4;

/// Worker cap from `ZZI_THREADS`; unset means one thread per core.
pub fn thread_cap() -> Result<usize, String> {
    match std::env::var("ZZI_THREADS") {
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!("ZZI_THREADS must be a positive integer, got {s:?}")),
        },
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    return 0;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    let threads = match thread_cap() {
        Ok(t) => t,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let report = match commands::execute(&config.command, threads) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = output::emit(&report, &config, stdout) {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_USAGE;
    }
    match &report.failure {
        Some(msg) => {
            let _ = writeln!(stderr, "consistency failure: {msg}");
            EXIT_CONSISTENCY
        }
        None => 0,
    }
}
