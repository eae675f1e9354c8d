//! `sgdlab` — config-driven frontend over the simulation harness, the limit
//! integrators, and the fixed-point catalogues.
//!
//! Exit codes: 0 on success, 1 on runtime/domain failures, 2 on configuration
//! problems (including command-line parsing, which clap also reports as 2).

mod args;
mod commands;
mod overrides;
mod presets;

use clap::Parser;
use sgdlab_fixedpoints::FixedPointError;
use sgdlab_harness::HarnessError;
use sgdlab_limits::LimitError;
use sgdlab_models::ModelError;

/// Lets `sgdlab ... | head` terminate quietly instead of panicking on a
/// broken pipe (Rust masks SIGPIPE by default).
#[cfg(unix)]
fn restore_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn restore_sigpipe() {}

fn main() {
    restore_sigpipe();
    let cli = args::Cli::parse();
    if let Err(err) = commands::dispatch(cli) {
        eprintln!("error: {err}");
        let mut source = std::error::Error::source(&err);
        while let Some(cause) = source {
            eprintln!("  caused by: {cause}");
            source = cause.source();
        }
        std::process::exit(exit_code(&err));
    }
}

/// 2 for configuration problems, 1 for runtime/domain failures.
fn exit_code(err: &HarnessError) -> i32 {
    match err {
        HarnessError::Config(_)
        | HarnessError::Io { .. }
        | HarnessError::Toml(_)
        | HarnessError::Json(_)
        | HarnessError::Model(ModelError::InvalidParam(_))
        | HarnessError::Limit(LimitError::InvalidConfig(_))
        | HarnessError::FixedPoint(FixedPointError::InvalidInput(_)) => 2,
        _ => 1,
    }
}
