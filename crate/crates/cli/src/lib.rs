//! Command-line front end for the `cylfi` engine.
//!
//! Every subcommand prints JSON. Complex numbers are `[re, im]` pairs, and
//! failures are reported on stderr as `{"error": {"kind": ..., ...}}` with
//! exit code 2 for bad input, 3 for numerical or convergence failures and 1
//! when `check` finds a residual above tolerance.
//!
//! Polynomial grammar (whitespace is ignored):
//!
//! ```text
//! poly   := sign? term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := number | "(" number "," number ")" | "s" index ("^" exponent)?
//! ```
//!
//! `(a,b)` is the complex literal `a + b·i` and `sK` is the `K`-th coordinate,
//! counted from 1.

pub mod args;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;
pub mod suite;

use clap::Parser;

pub use args::Cli;
pub use commands::Outcome;
pub use error::CliError;

/// Parses `argv`, runs the command and returns `(stdout, stderr, exit code)`.
pub fn run_from_args<I, T>(argv: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return (e.to_string(), String::new(), error::EXIT_OK);
            }
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            return (String::new(), format!("{}\n", err.to_json()), err.exit_code());
        }
    };
    match commands::run(&cli.command) {
        Ok(out) => (out.stdout, String::new(), out.exit_code),
        Err(err) => (String::new(), format!("{}\n", err.to_json()), err.exit_code()),
    }
}
